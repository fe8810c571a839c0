"""Command-line interface: eval, leaderboard, correlate.

Every flag can also be set through an environment variable with the
``MESHSCORE_`` prefix (e.g. ``MESHSCORE_LEVEL=1`` for ``--level``); explicit
flags win. Exit codes: 0 success, 1 validation, 2 backend/transport,
3 internal.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import sys
from pathlib import Path

from .aggregation import ConvolutionConfig
from .errors import MeshScoreError, ValidationError
from .pipeline import CaptureConfig, EvalConfig, PipelineStageError, evaluate_mesh
from .prompts import SUITES, PromptRecord, bundled_suite, load_suite
from .rasterizer import RenderConfig
from .report import EvaluationReport, load_reports, write_report
from .scoring import MockBackend, RemoteBackend
from .stats import kendall, pearson, spearman

ENV_PREFIX = "MESHSCORE_"


def _env(name: str, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    if cast is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return cast(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshscore",
        description="Multi-view quality and alignment metrics for textured 3D meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate one mesh against one prompt")
    ev.add_argument("--mesh", required=True, help="OBJ or .tmesh file")
    ev.add_argument("--prompt", default=_env("PROMPT", None), help="prompt text")
    ev.add_argument("--suite-file", default=_env("SUITE_FILE", None), help="suite JSONL path")
    ev.add_argument("--suite", default=_env("SUITE", None), choices=SUITES, help="bundled suite name")
    ev.add_argument("--prompt-id", default=_env("PROMPT_ID", None), help="prompt id within the suite")
    ev.add_argument("--method", default=_env("METHOD", "unknown"), help="generator name for leaderboards")
    ev.add_argument("--level", type=int, default=_env("LEVEL", 2, int))
    ev.add_argument("--radius", type=float, default=_env("RADIUS", 2.2, float))
    ev.add_argument(
        "--focals",
        default=_env("FOCALS", "3.0,4.0,5.0,6.0,7.5"),
        help="comma-separated focal lengths",
    )
    ev.add_argument("--resolution", type=int, default=_env("RESOLUTION", 512, int))
    ev.add_argument("--sensor-half-width", type=float, default=_env("SENSOR_HALF_WIDTH", 1.5, float))
    ev.add_argument("--conv-weight", type=float, default=_env("CONV_WEIGHT", 1.0, float))
    ev.add_argument("--conv-iters", type=int, default=_env("CONV_ITERS", 3, int))
    ev.add_argument("--views", type=int, choices=(160, 161), default=_env("VIEWS", 160, int))
    ev.add_argument("--model", default=_env("MODEL", "imagereward"), help="text-image scoring model")
    ev.add_argument("--scorer-url", default=_env("SCORER_URL", None))
    ev.add_argument("--mock", action="store_true", default=_env("MOCK", False, bool))
    ev.add_argument("--out-dir", default=_env("OUT_DIR", "reports"))
    ev.add_argument("--export-frames", default=_env("EXPORT_FRAMES", None), metavar="DIR")
    ev.add_argument("--jobs", type=int, default=_env("JOBS", 0, int))

    lb = sub.add_parser("leaderboard", help="aggregate reports into per-method means")
    lb.add_argument("--reports", required=True, help="directory of report JSON files")
    lb.add_argument("--csv", default=None, help="also write the table as CSV here")

    co = sub.add_parser("correlate", help="correlate reports with human annotations")
    co.add_argument("--reports", required=True)
    co.add_argument("--annotations", required=True, help="CSV: id,quality_1to5,alignment_1to5")
    return parser


def _resolve_prompt(args) -> PromptRecord:
    if args.prompt:
        digest = hashlib.sha1(args.prompt.encode()).hexdigest()[:10]
        return PromptRecord(id=f"adhoc-{digest}", text=args.prompt, suite="adhoc")
    if args.suite_file or args.suite:
        manifest = load_suite(args.suite_file) if args.suite_file else bundled_suite(args.suite)
        if not args.prompt_id:
            raise ValidationError("--prompt-id is required with --suite-file/--suite")
        for record in manifest.records:
            if record.id == args.prompt_id:
                return record
        raise ValidationError(f"prompt id {args.prompt_id!r} not in suite {manifest.suite!r}")
    raise ValidationError("one of --prompt or --suite-file/--suite is required")


def cmd_eval(args) -> int:
    prompt = _resolve_prompt(args)
    focals = tuple(float(f) for f in str(args.focals).split(","))
    config = EvalConfig(
        capture=CaptureConfig(
            level=args.level,
            radius=args.radius,
            include_top_pole=(args.views == 161),
        ),
        render=RenderConfig(
            resolution=args.resolution,
            focal_lengths=focals,
            sensor_half_width=args.sensor_half_width,
        ),
        convolution=ConvolutionConfig(weight=args.conv_weight, iterations=args.conv_iters),
        scorer_model=args.model,
        workers=args.jobs,
        deterministic=args.mock,
        export_frames_dir=args.export_frames,
    )
    if args.mock:
        backend = MockBackend()
    elif args.scorer_url:
        backend = RemoteBackend(args.scorer_url)
    else:
        raise ValidationError("pass --mock or --scorer-url to choose a scoring backend")

    try:
        report, key = evaluate_mesh(
            args.mesh, prompt, backend, config, method=args.method
        )
    except PipelineStageError as err:
        path = write_report(err.partial, args.out_dir, _partial_key(args, prompt))
        print(f"stage {err.stage!r} failed: {err.cause}", file=sys.stderr)
        print(f"partial report: {path}", file=sys.stderr)
        return err.exit_code

    path = write_report(report, args.out_dir, key)
    print(f"quality    {report.quality['normalized']:.2f}")
    print(f"alignment  {report.alignment['normalized']:.2f}")
    print(f"report     {path}")
    return 0


def _partial_key(args, prompt) -> str:
    digest = hashlib.sha256(f"{args.mesh}|{prompt.id}|{args.method}".encode())
    return "partial-" + digest.hexdigest()[:12]


def leaderboard_rows(reports: list[EvaluationReport]) -> list[dict]:
    groups: dict[tuple[str, str], list[EvaluationReport]] = {}
    for report in reports:
        if report.status != "final":
            continue
        groups.setdefault((report.prompt["suite"], report.method), []).append(report)
    if not groups:
        raise ValidationError("no final reports to aggregate")
    rows = []
    for (suite, method), members in sorted(groups.items()):
        quality = [r.quality["normalized"] for r in members]
        alignment = [r.alignment["normalized"] for r in members]
        average = [(q + a) / 2.0 for q, a in zip(quality, alignment)]
        rows.append(
            {
                "suite": suite,
                "method": method,
                "count": len(members),
                "quality": sum(quality) / len(quality),
                "alignment": sum(alignment) / len(alignment),
                "average": sum(average) / len(average),
            }
        )
    return rows


def cmd_leaderboard(args) -> int:
    rows = leaderboard_rows(load_reports(args.reports))
    table = _format_table(
        ["suite", "method", "n", "quality", "alignment", "average"],
        [
            [r["suite"], r["method"], str(r["count"]), f"{r['quality']:.2f}",
             f"{r['alignment']:.2f}", f"{r['average']:.2f}"]
            for r in rows
        ],
    )
    print(table)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["suite", "method", "count", "quality", "alignment", "average"]
            )
            writer.writeheader()
            writer.writerows(rows)
    return 0


def correlation_table(reports: list[EvaluationReport], annotations: dict[str, tuple[float, float]]):
    joined = [
        (
            report.quality["normalized"],
            report.alignment["normalized"],
            *annotations[report.report_id],
        )
        for report in reports
        if report.status == "final" and report.report_id in annotations
    ]
    if not joined:
        raise ValidationError("no report ids match the annotation ids")
    quality, alignment, human_q, human_a = map(list, zip(*joined))
    rows = []
    for dimension, computed, human in (
        ("quality", quality, human_q),
        ("alignment", alignment, human_a),
    ):
        rows.append(
            {
                "dimension": dimension,
                "n": len(computed),
                "pearson": pearson(computed, human),
                "spearman": spearman(computed, human),
                "kendall": kendall(computed, human),
            }
        )
    return rows


def read_annotations(path: str | Path) -> dict[str, tuple[float, float]]:
    annotations = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "quality_1to5", "alignment_1to5"}
        if reader.fieldnames is None or required - set(reader.fieldnames):
            raise ValidationError(f"annotation CSV needs columns {sorted(required)}")
        for row in reader:
            annotations[row["id"]] = (float(row["quality_1to5"]), float(row["alignment_1to5"]))
    if not annotations:
        raise ValidationError("annotation CSV is empty")
    return annotations


def cmd_correlate(args) -> int:
    rows = correlation_table(load_reports(args.reports), read_annotations(args.annotations))
    table = _format_table(
        ["dimension", "n", "spearman", "kendall", "pearson"],
        [
            [r["dimension"], str(r["n"]), f"{r['spearman']:.3f}",
             f"{r['kendall']:.3f}", f"{r['pearson']:.3f}"]
            for r in rows
        ],
    )
    print(table)
    print("note: ties are handled with mean ranks (spearman) and tau-b (kendall)")
    return 0


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"eval": cmd_eval, "leaderboard": cmd_leaderboard, "correlate": cmd_correlate}
    try:
        return handlers[args.command](args)
    except MeshScoreError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    except Exception as err:  # pragma: no cover - unexpected internal failure
        print(f"internal error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
