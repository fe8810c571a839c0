import json


from meshscore.cli import main
from meshscore.report import EvaluationReport, load_reports, write_report


def eval_args(mesh, out_dir, *extra):
    return [
        "eval",
        "--mesh", str(mesh),
        "--prompt", "a checkered cube",
        "--mock",
        "--level", "1",
        "--resolution", "64",
        "--focals", "4.0,6.0",
        "--out-dir", str(out_dir),
        *extra,
    ]


def test_eval_mock_writes_report(cube_obj_path, tmp_path, capsys):
    out = tmp_path / "reports"
    assert main(eval_args(cube_obj_path, out)) == 0
    printed = capsys.readouterr().out
    assert "quality" in printed and "alignment" in printed
    reports = load_reports(out)
    assert len(reports) == 1
    assert reports[0].status == "final"
    assert 0 <= reports[0].quality["normalized"] <= 100


def test_eval_rerun_is_byte_identical(cube_obj_path, tmp_path):
    out = tmp_path / "reports"
    assert main(eval_args(cube_obj_path, out)) == 0
    first = {p.name: p.read_bytes() for p in out.glob("*.json")}
    assert main(eval_args(cube_obj_path, out)) == 0
    second = {p.name: p.read_bytes() for p in out.glob("*.json")}
    assert first == second


def test_eval_requires_backend_choice(cube_obj_path, tmp_path, capsys):
    args = eval_args(cube_obj_path, tmp_path)
    args.remove("--mock")
    assert main(args) == 1
    assert "scorer" in capsys.readouterr().err


def test_eval_unreachable_backend_exit_2_stage_scoring(cube_obj_path, tmp_path, capsys):
    args = eval_args(cube_obj_path, tmp_path)
    args.remove("--mock")
    args += ["--scorer-url", "http://127.0.0.1:9"]
    assert main(args) == 2
    err = capsys.readouterr().err
    assert "'scoring'" in err
    partials = list(tmp_path.glob("report-partial-*.json"))
    assert len(partials) == 1
    partial = EvaluationReport.from_json(partials[0].read_text())
    assert partial.status == "partial"
    assert partial.error["stage"] == "scoring"


def test_eval_missing_mesh_exit_1(tmp_path, capsys):
    assert main(eval_args(tmp_path / "absent.obj", tmp_path)) == 1


def test_eval_views_161(cube_obj_path, tmp_path):
    out = tmp_path / "reports"
    assert main(eval_args(cube_obj_path, out, "--views", "161")) == 0
    report = load_reports(out)[0]
    assert report.capture["include_top_pole"] is True
    assert report.quality["view_count"] == 41  # level 1: 40 usable + top pole


def test_eval_bundled_suite_prompt(cube_obj_path, tmp_path):
    out = tmp_path / "reports"
    args = [
        "eval", "--mesh", str(cube_obj_path),
        "--suite", "single_object", "--prompt-id", "single_object-001",
        "--mock", "--level", "0", "--resolution", "64", "--focals", "4.0",
        "--out-dir", str(out),
    ]
    assert main(args) == 0
    report = load_reports(out)[0]
    assert report.prompt["text"] == "A pig wearing a backpack"


def fake_report(report_id, method, suite, quality, alignment):
    return EvaluationReport(
        report_id=report_id,
        method=method,
        mesh={"path": "x.obj", "sha256": "0" * 64},
        prompt={"id": report_id.split(":")[1], "text": "p", "suite": suite},
        capture={}, render={}, convolution={}, scorer={},
        quality={"normalized": quality, "raw": 0.0},
        alignment={"normalized": alignment},
    )


def test_leaderboard_means(tmp_path, capsys):
    reports = tmp_path / "reports"
    write_report(fake_report("m1:p1", "m1", "single_object", 40.0, 20.0), reports, "a1")
    write_report(fake_report("m1:p2", "m1", "single_object", 60.0, 40.0), reports, "a2")
    write_report(fake_report("m2:p1", "m2", "multiple_objects", 10.0, 30.0), reports, "a3")
    assert main(["leaderboard", "--reports", str(reports)]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.startswith(("single_object", "multiple_objects"))]
    assert any("m1" in l and "50.00" in l and "30.00" in l and "40.00" in l for l in lines)
    assert any("m2" in l and "10.00" in l and "30.00" in l and "20.00" in l for l in lines)


def test_leaderboard_single_report_equals_its_values(tmp_path, capsys):
    reports = tmp_path / "reports"
    write_report(fake_report("m1:p1", "m1", "single_object", 42.5, 17.5), reports, "b1")
    assert main(["leaderboard", "--reports", str(reports)]) == 0
    out = capsys.readouterr().out
    assert "42.50" in out and "17.50" in out and "30.00" in out


def test_leaderboard_csv_and_idempotent(tmp_path, capsys):
    reports = tmp_path / "reports"
    write_report(fake_report("m1:p1", "m1", "single_object", 40.0, 20.0), reports, "c1")
    csv_path = tmp_path / "board.csv"
    assert main(["leaderboard", "--reports", str(reports), "--csv", str(csv_path)]) == 0
    first = capsys.readouterr().out
    assert main(["leaderboard", "--reports", str(reports), "--csv", str(csv_path)]) == 0
    assert capsys.readouterr().out == first
    assert "suite,method,count,quality,alignment,average" in csv_path.read_text()


def test_leaderboard_empty_dir_errors(tmp_path, capsys):
    empty = tmp_path / "reports"
    empty.mkdir()
    assert main(["leaderboard", "--reports", str(empty)]) == 1


def write_annotations(path, rows):
    lines = ["id,quality_1to5,alignment_1to5"]
    lines += [f"{r[0]},{r[1]},{r[2]}" for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_correlate_perfect_agreement(tmp_path, capsys):
    reports = tmp_path / "reports"
    annotations = tmp_path / "ann.csv"
    rows = []
    for i, (q, a) in enumerate([(10.0, 20.0), (35.0, 55.0), (60.0, 90.0), (85.0, 5.0)]):
        write_report(fake_report(f"m:p{i}", "m", "single_object", q, a), reports, f"d{i}")
        rows.append((f"m:p{i}", 1 + q / 25.0, 1 + a / 25.0))
    write_annotations(annotations, rows)
    assert main(["correlate", "--reports", str(reports), "--annotations", str(annotations)]) == 0
    out = capsys.readouterr().out
    assert out.count("1.000") >= 6
    assert "tau-b" in out


def test_correlate_reversed_annotations(tmp_path, capsys):
    reports = tmp_path / "reports"
    annotations = tmp_path / "ann.csv"
    rows = []
    for i, q in enumerate([10.0, 30.0, 50.0, 70.0]):
        write_report(fake_report(f"m:p{i}", "m", "single_object", q, q), reports, f"e{i}")
        rows.append((f"m:p{i}", 5 - i, 5 - i))
    write_annotations(annotations, rows)
    assert main(["correlate", "--reports", str(reports), "--annotations", str(annotations)]) == 0
    out = capsys.readouterr().out
    assert out.count("-1.000") >= 6


def test_correlate_no_join_errors(tmp_path, capsys):
    reports = tmp_path / "reports"
    annotations = tmp_path / "ann.csv"
    write_report(fake_report("m:p0", "m", "single_object", 10.0, 10.0), reports, "f0")
    write_annotations(annotations, [("other:p9", 3, 3), ("other:p8", 2, 4), ("other:p7", 1, 5)])
    assert main(["correlate", "--reports", str(reports), "--annotations", str(annotations)]) == 1
    assert "match" in capsys.readouterr().err


def test_correlate_synthetic_noise_matches_stats_module(tmp_path, capsys):
    import numpy as np

    from meshscore.stats import kendall, pearson, spearman

    rng = np.random.default_rng(17)
    reports = tmp_path / "reports"
    annotations = tmp_path / "ann.csv"
    computed_q, computed_a, human_q, human_a = [], [], [], []
    rows = []
    for i in range(12):
        q = float(rng.uniform(0, 100))
        a = float(rng.uniform(0, 100))
        hq = float(np.clip(round(1 + 4 * q / 100 + rng.normal(0, 0.5)), 1, 5))
        ha = float(np.clip(round(1 + 4 * a / 100 + rng.normal(0, 0.5)), 1, 5))
        write_report(fake_report(f"m:p{i}", "m", "single_object", q, a), reports, f"g{i}")
        rows.append((f"m:p{i}", hq, ha))
        computed_q.append(q), computed_a.append(a)
        human_q.append(hq), human_a.append(ha)
    write_annotations(annotations, rows)
    assert main(["correlate", "--reports", str(reports), "--annotations", str(annotations)]) == 0
    out = capsys.readouterr().out
    for line, computed, human in (("quality", computed_q, human_q), ("alignment", computed_a, human_a)):
        row = next(l for l in out.splitlines() if l.startswith(line))
        assert f"{spearman(computed, human):.3f}" in row
        assert f"{kendall(computed, human):.3f}" in row
        assert f"{pearson(computed, human):.3f}" in row
