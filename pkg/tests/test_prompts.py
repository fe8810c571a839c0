import json

import pytest

from meshscore.errors import InfeasibleDedupError, ValidationError
from meshscore.prompts import (
    SUITES,
    PromptRecord,
    bundled_suite,
    dedup_by_similarity,
    load_suite,
)


def write_suite(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def rec(i, text, suite="single_object"):
    return {"id": f"{suite}-{i:03d}", "text": text, "suite": suite}


def test_load_suite_roundtrip(tmp_path):
    path = tmp_path / "suite.jsonl"
    write_suite(path, [rec(1, "a red fox"), rec(2, "a blue whale")])
    manifest = load_suite(path)
    assert manifest.suite == "single_object"
    assert manifest.target_size == 2
    assert [r.text for r in manifest.records] == ["a red fox", "a blue whale"]


def test_duplicate_id_rejected_with_offender(tmp_path):
    path = tmp_path / "suite.jsonl"
    write_suite(path, [rec(1, "a red fox"), rec(1, "a blue whale")])
    with pytest.raises(ValidationError, match="single_object-001"):
        load_suite(path)


def test_empty_text_rejected(tmp_path):
    path = tmp_path / "suite.jsonl"
    write_suite(path, [rec(1, "  ")])
    with pytest.raises(ValidationError, match="empty text"):
        load_suite(path)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "suite.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(ValidationError, match="no records"):
        load_suite(path)


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "suite.jsonl"
    path.write_text('{"id": "x"\n', encoding="utf-8")
    with pytest.raises(ValidationError, match="line 1"):
        load_suite(path)


@pytest.mark.parametrize("name", SUITES)
def test_bundled_suites_have_100_records(name):
    manifest = bundled_suite(name)
    assert len(manifest.records) == 100
    assert all(r.suite == name for r in manifest.records)
    assert len({r.id for r in manifest.records}) == 100


def test_bundled_suite_unknown_name():
    with pytest.raises(ValidationError):
        bundled_suite("nonexistent")


def P(i, text):
    return PromptRecord(id=f"p{i:02d}", text=text, suite="single_object")


def test_identical_prompts_deduped_first():
    pool = [P(1, "a green turtle"), P(2, "a green turtle"), P(3, "an orange cat")]
    out = dedup_by_similarity(pool, target_n=2, threshold=0.9)
    assert [r.id for r in out] == ["p01", "p03"]


def test_disjoint_pool_returned_unchanged():
    pool = [P(1, "crimson dragon"), P(2, "wooden chair"), P(3, "silver spoon")]
    out = dedup_by_similarity(pool, target_n=3, threshold=0.5)
    assert out == pool


def test_red_fox_example():
    pool = [P(1, "a red fox"), P(2, "a red fox running"), P(3, "a blue whale")]
    out = dedup_by_similarity(pool, target_n=2, threshold=0.6)
    assert [r.text for r in out] == ["a red fox", "a blue whale"]


def test_order_preserved_and_subset():
    pool = [P(i, t) for i, t in enumerate(
        ["a red fox", "a blue jay", "a red fox sitting", "an old clock", "a tin robot"]
    )]
    out = dedup_by_similarity(pool, target_n=4, threshold=0.6)
    ids = [r.id for r in out]
    assert ids == sorted(ids, key=lambda x: [p.id for p in pool].index(x))
    assert set(out) <= set(pool)


def test_threshold_satisfied_after_filtering():
    from meshscore.alignment import rouge_l_text

    pool = [P(i, t) for i, t in enumerate(
        ["a red fox", "a red fox running", "a red fox sleeping", "a blue whale", "a tall giraffe"]
    )]
    out = dedup_by_similarity(pool, target_n=3, threshold=0.6)
    assert len(out) == 3
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            assert rouge_l_text(out[i].text, out[j].text).f1 <= 0.6


def test_deterministic():
    pool = [P(i, t) for i, t in enumerate(
        ["a red fox", "a red fox running", "a blue whale", "a blue whale diving"]
    )]
    a = dedup_by_similarity(pool, target_n=2, threshold=0.5)
    b = dedup_by_similarity(pool, target_n=2, threshold=0.5)
    assert a == b


def test_infeasible_reports_floor():
    pool = [P(1, "a red fox"), P(2, "a red fox")]
    with pytest.raises(InfeasibleDedupError) as info:
        dedup_by_similarity(pool, target_n=2, threshold=0.5)
    assert info.value.floor_similarity == pytest.approx(1.0)


def test_pool_smaller_than_target_rejected():
    with pytest.raises(ValidationError):
        dedup_by_similarity([P(1, "a red fox")], target_n=2)
