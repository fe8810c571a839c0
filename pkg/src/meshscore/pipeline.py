"""End-to-end evaluation: capture, score, aggregate, align, report.

Stage order: load -> normalize -> multi-focal multi-view capture -> per-view
scoring -> best-focal selection -> regional convolution -> max -> normalize,
then the captioning/judging alignment pass. Per-viewpoint work runs on a
bounded thread pool; results are assembled strictly by (viewpoint, focal)
index, so parallel runs are byte-identical to sequential ones.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregation import (
    ConvolutionConfig,
    best_focal,
    normalize_quality,
    quality_score,
    regional_convolution,
)
from .alignment import evaluate_alignment
from .errors import MeshScoreError
from .geometry import build_view_graph, capture_locations
from .mesh import load_mesh, normalize_mesh
from .prompts import PromptRecord
from .rasterizer import Frame, RenderConfig, multi_focal_capture, save_frame_png
from .report import EvaluationReport, file_sha256, report_key
from .scoring import MODEL_SCORE_RANGES

ALIGNMENT_VIEW_COUNT = 12


@dataclass(frozen=True)
class CaptureConfig:
    level: int = 2
    radius: float = 2.2
    vertical_axis: str = "z"
    include_top_pole: bool = False


@dataclass(frozen=True)
class EvalConfig:
    capture: CaptureConfig = CaptureConfig()
    render: RenderConfig = RenderConfig()
    convolution: ConvolutionConfig = ConvolutionConfig()
    scorer_model: str = "imagereward"
    source_range: tuple[float, float] | None = None
    workers: int = 0
    deterministic: bool = False
    export_frames_dir: str | None = None

    def quality_range(self) -> tuple[float, float]:
        if self.source_range is not None:
            return self.source_range
        return MODEL_SCORE_RANGES.get(self.scorer_model, (-2.5, 2.5))

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        return min(8, os.cpu_count() or 1)

    def fingerprint(self) -> str:
        c, r, v = self.capture, self.render, self.convolution
        return (
            f"l{c.level}-r{c.radius}-{c.vertical_axis}-pole{int(c.include_top_pole)}"
            f"-res{r.resolution}-f{','.join(str(f) for f in r.focal_lengths)}"
            f"-s{r.sensor_half_width}-w{v.weight}-t{v.iterations}-m{self.scorer_model}"
        )


@dataclass
class QualityOutcome:
    graph_key: str
    vertex_indices: tuple[int, ...]
    per_view_scores: list[list[float]]
    coverages: list[list[float]]
    chosen_focal_indices: list[int]
    best_field_values: list[float]
    smoothed_field_values: list[float]
    raw: float
    normalized: float
    source_range: tuple[float, float]
    cached_frames: dict[int, Frame] = field(default_factory=dict)


class PipelineStageError(MeshScoreError):
    """Wraps a stage failure together with the partial report built so far."""

    def __init__(self, stage: str, cause: MeshScoreError, partial: EvaluationReport):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial
        self.exit_code = getattr(cause, "exit_code", 3)


def evaluate_quality(mesh, prompt: str, scorer, config: EvalConfig) -> QualityOutcome:
    graph = build_view_graph(config.capture.level, config.capture.vertical_axis)
    poses = capture_locations(
        graph, config.capture.radius, include_top_pole=config.capture.include_top_pole
    )
    indices = graph.capture_indices(config.capture.include_top_pole)

    def capture_and_score(k: int):
        frames = multi_focal_capture(mesh, poses[k], config.render)
        scores = [
            scorer.score_image(prompt, f.pixels, config.scorer_model) for f in frames
        ]
        chosen = int(np.argmax(scores))
        keep = frames[chosen] if indices[k] < ALIGNMENT_VIEW_COUNT else None
        return scores, [f.coverage for f in frames], keep

    workers = config.effective_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(capture_and_score, range(len(poses))))
    else:
        results = [capture_and_score(k) for k in range(len(poses))]

    per_view_scores = [r[0] for r in results]
    coverages = [r[1] for r in results]
    cached = {
        indices[k]: r[2] for k, r in enumerate(results) if r[2] is not None
    }

    field_best, chosen_indices = best_focal(per_view_scores, graph, indices)
    smoothed = regional_convolution(field_best, graph, config.convolution)
    raw = quality_score(smoothed)
    source_range = config.quality_range()
    return QualityOutcome(
        graph_key=graph.key,
        vertex_indices=indices,
        per_view_scores=per_view_scores,
        coverages=coverages,
        chosen_focal_indices=chosen_indices,
        best_field_values=[float(v) for v in field_best.values],
        smoothed_field_values=[float(v) for v in smoothed.values],
        raw=raw,
        normalized=normalize_quality(raw, source_range),
        source_range=source_range,
        cached_frames=cached,
    )


def evaluate_mesh(
    mesh_path: str | Path,
    prompt: PromptRecord,
    backend,
    config: EvalConfig = EvalConfig(),
    method: str = "unknown",
    scorer=None,
) -> tuple[EvaluationReport, str]:
    """Full quality + alignment evaluation of one mesh against one prompt.

    ``backend`` provides captioning/merging/judging; ``scorer`` the text-image
    scores (defaults to ``backend`` when it can score). Returns the report and
    its storage key. Stage failures raise :class:`PipelineStageError` carrying
    a partial, non-final report.
    """
    if scorer is None and hasattr(backend, "score_image"):
        scorer = backend
    mesh_path = Path(mesh_path)
    timings: dict[str, float] = {}
    base = dict(
        report_id=f"{method}:{prompt.id}",
        method=method,
        mesh={"path": str(mesh_path), "sha256": None},
        prompt={"id": prompt.id, "text": prompt.text, "suite": prompt.suite},
        capture={
            "level": config.capture.level,
            "radius": config.capture.radius,
            "vertical_axis": config.capture.vertical_axis,
            "include_top_pole": config.capture.include_top_pole,
        },
        render={
            "resolution": config.render.resolution,
            "focal_lengths": list(config.render.focal_lengths),
            "sensor_half_width": config.render.sensor_half_width,
            "background": list(config.render.background),
            "texture_filter": config.render.texture_filter,
        },
        convolution={
            "weight": config.convolution.weight,
            "iterations": config.convolution.iterations,
        },
        scorer={
            "model": config.scorer_model,
            "source_range": list(config.quality_range()),
            "backend": _backend_metadata(scorer, backend),
        },
        quality=None,
        alignment=None,
    )
    key = ""

    def fail(stage: str, err: MeshScoreError):
        partial = EvaluationReport(
            **base,
            status="partial",
            error={"stage": stage, "type": type(err).__name__, "message": str(err)},
            timings=None if config.deterministic else timings,
        )
        raise PipelineStageError(stage, err, partial) from err

    stage = "load"
    try:
        start = time.perf_counter()
        mesh = load_mesh(mesh_path)
        base["mesh"]["sha256"] = file_sha256(mesh_path)
        key = report_key(base["mesh"]["sha256"], prompt.id, method, config.fingerprint())
        mesh, transform = normalize_mesh(mesh)
        base["mesh"]["normalization"] = {
            "translation": [float(v) for v in transform.translation],
            "uniform_scale": float(transform.uniform_scale),
        }
        timings[stage] = time.perf_counter() - start
    except MeshScoreError as err:
        fail(stage, err)

    stage = "scoring"
    try:
        start = time.perf_counter()
        outcome = evaluate_quality(mesh, prompt.text, scorer, config)
        base["quality"] = {
            "graph": outcome.graph_key,
            "view_count": len(outcome.vertex_indices),
            "vertex_indices": list(outcome.vertex_indices),
            "per_view_focal_scores": outcome.per_view_scores,
            "per_view_coverage": outcome.coverages,
            "chosen_focal_indices": outcome.chosen_focal_indices,
            "best_field": outcome.best_field_values,
            "smoothed_field": outcome.smoothed_field_values,
            "raw": outcome.raw,
            "normalized": outcome.normalized,
        }
        timings[stage] = time.perf_counter() - start
    except MeshScoreError as err:
        fail(stage, err)

    stage = "alignment"
    try:
        start = time.perf_counter()
        result = evaluate_alignment(
            mesh,
            prompt.text,
            backend,
            config.render,
            scorer=scorer,
            scorer_model=config.scorer_model,
            radius=config.capture.radius,
            vertical_axis=config.capture.vertical_axis,
            cached_frames=outcome.cached_frames,
            caption_workers=config.effective_workers(),
        )
        base["alignment"] = {
            "view_captions": list(result.view_captions),
            "merged_caption": result.merged_caption,
            "judge_score": result.judge_score,
            "judge_raw": result.judge_raw,
            "rouge": {
                "precision": result.rouge.precision,
                "recall": result.rouge.recall,
                "f1": result.rouge.f1,
                "lcs_length": result.rouge.lcs_length,
            },
            "normalized": result.normalized,
        }
        timings[stage] = time.perf_counter() - start
    except MeshScoreError as err:
        if hasattr(err, "partial"):
            base["alignment"] = {"view_captions": err.partial.get("view_captions")}
        fail(stage, err)

    if config.export_frames_dir:
        _export_frames(outcome.cached_frames, config.export_frames_dir)

    report = EvaluationReport(
        **base,
        status="final",
        error=None,
        timings=None if config.deterministic else timings,
    )
    return report, key


def _backend_metadata(scorer, backend) -> dict:
    meta = {}
    for role, obj in (("scorer", scorer), ("caption_judge", backend)):
        if obj is None:
            meta[role] = None
        elif hasattr(obj, "metadata"):
            try:
                meta[role] = obj.metadata()
            except MeshScoreError as err:
                # leave the hard failure to the scoring stage
                meta[role] = {"mode": type(obj).__name__, "health": f"unavailable: {err}"}
        else:
            meta[role] = {"mode": type(obj).__name__}
    return meta


def _export_frames(frames: dict[int, Frame], directory: str) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for vertex, frame in sorted(frames.items()):
        save_frame_png(frame, out / f"view{vertex:03d}.png")
