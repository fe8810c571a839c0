"""Text alignment metric: multi-view captions, one merged caption, recall scoring.

The mesh is captured from the 12 vertices of a level-0 view graph, each view
is captioned, the captions are merged into a single description, and that
description is judged for how well it recalls the original prompt. The judge
verdict (1..5, mapped to 0..100) is the reported metric; an LCS-based recall
score is recorded alongside it.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .aggregation import normalize_quality
from .errors import MeshScoreError
from .geometry import build_view_graph, capture_locations
from .rasterizer import Frame, RenderConfig, multi_focal_capture

_TOKEN_RE = re.compile(r"[a-z0-9]+")

ALIGNMENT_SCORE_RANGE = (1.0, 5.0)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters, dropping empties."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    lcs_length: int


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        row = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = max(prev[j], row[j - 1])
        prev = row
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> RougeScore:
    """LCS-based precision/recall/F1 over token lists.

    Two empty sequences give an all-zero score rather than an error.
    """
    lcs = _lcs_length(list(candidate), list(reference))
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    if precision + recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return RougeScore(precision=precision, recall=recall, f1=f1, lcs_length=lcs)


def rouge_l_text(candidate: str, reference: str) -> RougeScore:
    return rouge_l(tokenize(candidate), tokenize(reference))


@dataclass(frozen=True)
class AlignmentResult:
    view_captions: tuple[str, ...]
    merged_caption: str
    judge_score: int
    judge_raw: str
    rouge: RougeScore
    normalized: float

    @property
    def rouge_recall(self) -> float:
        return self.rouge.recall


def _pick_frame(
    frames: list[Frame],
    prompt: str,
    scorer,
    scorer_model: str,
    coverage_target: float,
) -> tuple[Frame, int]:
    """Best-framed view: highest text-image score, or the coverage heuristic
    (coverage closest to the target) when no scorer is configured."""
    if scorer is not None:
        scores = [scorer.score_image(prompt, f.pixels, scorer_model) for f in frames]
        idx = max(range(len(frames)), key=lambda i: (scores[i], -i))
    else:
        idx = min(range(len(frames)), key=lambda i: (abs(frames[i].coverage - coverage_target), i))
    return frames[idx], idx


def evaluate_alignment(
    mesh,
    prompt: str,
    backend,
    render_config: RenderConfig,
    scorer=None,
    scorer_model: str = "imagereward",
    radius: float = 2.2,
    vertical_axis: str = "z",
    cached_frames: dict[int, Frame] | None = None,
    coverage_target: float = 0.4,
    caption_workers: int = 1,
) -> AlignmentResult:
    """Caption 12 level-0 views, merge, judge, and score recall.

    ``cached_frames`` maps level-0 vertex index to an already-chosen frame
    (typically the best-focal frames from a quality run); missing entries are
    re-rendered. On a backend failure the raised error carries a ``partial``
    dict with whatever captions resolved.
    """
    graph = build_view_graph(0, vertical_axis)
    poses = capture_locations(graph, radius)
    cached_frames = cached_frames or {}

    frames = []
    for i, pose in enumerate(poses):
        if i in cached_frames:
            frames.append(cached_frames[i])
            continue
        candidates = multi_focal_capture(mesh, pose, render_config)
        frame, _ = _pick_frame(candidates, prompt, scorer, scorer_model, coverage_target)
        frames.append(frame)

    captions: list[str | None] = [None] * len(frames)
    try:
        if caption_workers > 1:
            with ThreadPoolExecutor(max_workers=caption_workers) as pool:
                for i, caption in enumerate(pool.map(lambda f: backend.caption_image(f.pixels), frames)):
                    captions[i] = caption
        else:
            for i, frame in enumerate(frames):
                captions[i] = backend.caption_image(frame.pixels)
        merged = backend.merge_captions([c for c in captions if c is not None])
        verdict = backend.judge_recall(prompt, merged)
    except MeshScoreError as err:
        err.partial = {"view_captions": list(captions)}
        raise

    rouge = rouge_l(tokenize(merged), tokenize(prompt))
    normalized = normalize_quality(float(verdict.score), ALIGNMENT_SCORE_RANGE)
    return AlignmentResult(
        view_captions=tuple(captions),
        merged_caption=merged,
        judge_score=verdict.score,
        judge_raw=verdict.raw_response,
        rouge=rouge,
        normalized=normalized,
    )
