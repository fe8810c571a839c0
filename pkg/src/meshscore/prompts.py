"""Prompt suites and the similarity-based deduplication filter."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .alignment import rouge_l_text
from .errors import InfeasibleDedupError, ValidationError

SUITES = ("single_object", "single_with_surroundings", "multiple_objects")

DEFAULT_SIMILARITY_THRESHOLD = 0.5


@dataclass(frozen=True)
class PromptRecord:
    id: str
    text: str
    suite: str


@dataclass(frozen=True)
class SuiteManifest:
    suite: str
    records: tuple[PromptRecord, ...]
    target_size: int


def load_suite(path: str | Path) -> SuiteManifest:
    """Load a line-delimited JSON suite file ({"id", "text", "suite"} per line)."""
    path = Path(path)
    records = []
    problems = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                problems.append(f"line {lineno}: invalid JSON ({err.msg})")
                continue
            missing = {"id", "text", "suite"} - obj.keys()
            if missing:
                problems.append(f"line {lineno}: missing fields {sorted(missing)}")
                continue
            records.append(PromptRecord(id=str(obj["id"]), text=obj["text"], suite=obj["suite"]))

    if not records and not problems:
        problems.append("suite file contains no records")
    seen: dict[str, int] = {}
    for rec in records:
        if not rec.text.strip():
            problems.append(f"id {rec.id}: empty text")
        if rec.id in seen:
            problems.append(f"id {rec.id}: duplicated")
        seen[rec.id] = seen.get(rec.id, 0) + 1
    suites = {rec.suite for rec in records}
    if len(suites) > 1:
        problems.append(f"mixed suite names in one file: {sorted(suites)}")
    if problems:
        raise ValidationError(
            f"invalid suite file {path.name}: " + "; ".join(problems)
        )
    return SuiteManifest(
        suite=records[0].suite, records=tuple(records), target_size=len(records)
    )


def bundled_suite(name: str) -> SuiteManifest:
    """Load one of the suites shipped with the package."""
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}, expected one of {SUITES}")
    ref = resources.files("meshscore") / "data" / f"{name}.jsonl"
    with resources.as_file(ref) as path:
        return load_suite(path)


def dedup_by_similarity(
    pool: list[PromptRecord],
    target_n: int,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> list[PromptRecord]:
    """Greedily drop near-duplicates until ``target_n`` prompts remain.

    While any pair's similarity (LCS F1 on tokens) exceeds the threshold or
    the pool is larger than the target, the later-by-id member of the
    most-similar pair is removed. Raises when the threshold cannot be met
    without dropping below the target size.
    """
    if target_n < 1:
        raise ValidationError("target size must be at least 1")
    if len(pool) < target_n:
        raise ValidationError(
            f"pool of {len(pool)} cannot yield {target_n} prompts"
        )

    n = len(pool)
    sim = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            sim[i][j] = sim[j][i] = rouge_l_text(pool[i].text, pool[j].text).f1

    alive = list(range(n))
    while True:
        worst = None
        worst_sim = -1.0
        for a in range(len(alive)):
            for b in range(a + 1, len(alive)):
                s = sim[alive[a]][alive[b]]
                if s > worst_sim:
                    worst_sim = s
                    worst = (alive[a], alive[b])
        if len(alive) <= target_n and (worst is None or worst_sim <= threshold):
            return [pool[i] for i in alive]
        if len(alive) <= target_n:
            raise InfeasibleDedupError(
                f"cannot reach {target_n} prompts below similarity {threshold}; "
                f"floor is {worst_sim:.4f}",
                floor_similarity=worst_sim,
            )
        i, j = worst
        drop = j if pool[j].id > pool[i].id else i
        alive.remove(drop)
