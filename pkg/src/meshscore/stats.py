"""Correlation coefficients and the view-inconsistency score-drop harness."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .aggregation import ConvolutionConfig, ScoreField, quality_score, regional_convolution
from .errors import UndefinedCorrelationError, ValidationError
from .geometry import ViewGraph


@dataclass(frozen=True)
class PairedSamples:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
            raise ValidationError("paired samples must be equal-length 1-d lists")
        if len(x) < 3:
            raise ValidationError("need at least 3 paired samples")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValidationError("paired samples must be finite")


def pearson(x, y) -> float:
    """Product-moment correlation."""
    s = PairedSamples(x, y)
    dx = s.x - s.x.mean()
    dy = s.y - s.y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("zero variance makes the correlation undefined")
    return float((dx @ dy) / np.sqrt(vx * vy))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their rank span."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    s = PairedSamples(x, y)
    return pearson(_average_ranks(s.x), _average_ranks(s.y))


def kendall(x, y) -> float:
    """Tie-corrected (tau-b) rank correlation over all pairs."""
    s = PairedSamples(x, y)
    n = len(s.x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = np.sign(s.x[i] - s.x[j])
            b = np.sign(s.y[i] - s.y[j])
            if a == 0 and b == 0:
                continue
            if a == 0:
                ties_x += 1
            elif b == 0:
                ties_y += 1
            elif a == b:
                concordant += 1
            else:
                discordant += 1
    denom = np.sqrt(
        (concordant + discordant + ties_x) * (concordant + discordant + ties_y)
    )
    if denom == 0.0:
        raise UndefinedCorrelationError("all-tied data makes tau undefined")
    return float((concordant - discordant) / denom)


@dataclass(frozen=True)
class JanusPair:
    clean_field: ScoreField
    janus_field: ScoreField
    label: str

    def __post_init__(self):
        if self.clean_field.graph_key != self.janus_field.graph_key:
            raise ValidationError("pair fields live on different graphs")
        if self.clean_field.vertex_indices != self.janus_field.vertex_indices:
            raise ValidationError("pair fields cover different vertices")


@dataclass(frozen=True)
class JanusPairDrop:
    label: str
    raw_drop: float
    convolved_drop: float


@dataclass(frozen=True)
class JanusDropReport:
    pairs: tuple[JanusPairDrop, ...]
    skipped: tuple[str, ...]
    mean_raw_drop: float
    mean_convolved_drop: float


def janus_drop(
    pairs: list[JanusPair],
    graph: ViewGraph,
    config: ConvolutionConfig = ConvolutionConfig(),
) -> JanusDropReport:
    """Relative quality drop per pair, with and without regional convolution.

    drop = (q_clean - q_janus) / q_clean for each pipeline. Pairs whose clean
    quality is non-positive are skipped with a warning since the relative
    drop is undefined there.
    """
    if not pairs:
        raise ValidationError("need at least one pair")
    rows = []
    skipped = []
    for pair in pairs:
        q_clean_raw = quality_score(pair.clean_field)
        q_clean_conv = quality_score(regional_convolution(pair.clean_field, graph, config))
        if q_clean_raw <= 0.0 or q_clean_conv <= 0.0:
            warnings.warn(f"pair {pair.label!r} skipped: clean quality <= 0")
            skipped.append(pair.label)
            continue
        q_janus_raw = quality_score(pair.janus_field)
        q_janus_conv = quality_score(regional_convolution(pair.janus_field, graph, config))
        rows.append(
            JanusPairDrop(
                label=pair.label,
                raw_drop=(q_clean_raw - q_janus_raw) / q_clean_raw,
                convolved_drop=(q_clean_conv - q_janus_conv) / q_clean_conv,
            )
        )
    mean_raw = float(np.mean([r.raw_drop for r in rows])) if rows else float("nan")
    mean_conv = float(np.mean([r.convolved_drop for r in rows])) if rows else float("nan")
    return JanusDropReport(
        pairs=tuple(rows),
        skipped=tuple(skipped),
        mean_raw_drop=mean_raw,
        mean_convolved_drop=mean_conv,
    )
