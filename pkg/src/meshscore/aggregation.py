"""Per-view score aggregation into the final quality number.

Pipeline order is fixed: pick the best focal per viewpoint, smooth the
resulting field over the view graph, then take the maximum. Smoothing uses
iterative neighbor mean pooling,

    s_i <- (s_i + w * sum_{j in N(i)} s_j) / (w * |N(i)| + 1),

applied synchronously: every iteration reads only the previous iterate.
Neighborhoods are restricted to the vertices the field actually covers, so
excluded poles never contribute.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ValidationError
from .geometry import ViewGraph


@dataclass(frozen=True)
class ConvolutionConfig:
    weight: float = 1.0
    iterations: int = 3

    def __post_init__(self):
        if self.weight < 0:
            raise ConfigError("convolution weight must be non-negative")
        if self.iterations < 0:
            raise ConfigError("iterations must be non-negative")


@dataclass(frozen=True)
class ScoreField:
    """Scalar score per captured vertex of a view graph."""

    graph_key: str
    vertex_indices: tuple[int, ...]
    values: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) != len(self.vertex_indices):
            raise ValidationError("field needs one value per vertex index")
        if len(values) and not np.isfinite(values).all():
            raise ValidationError("field values must be finite")


def best_focal(
    per_vertex_scores: list[list[float]],
    graph: ViewGraph,
    vertex_indices: tuple[int, ...] | None = None,
) -> tuple[ScoreField, list[int]]:
    """Max score over focals per vertex; ties go to the lowest focal index.

    Returns the field plus the chosen focal index per vertex.
    """
    if vertex_indices is None:
        vertex_indices = graph.usable_indices
    if len(per_vertex_scores) != len(vertex_indices):
        raise ValidationError(
            f"expected {len(vertex_indices)} per-vertex score lists, "
            f"got {len(per_vertex_scores)}"
        )
    values = np.empty(len(per_vertex_scores))
    chosen = []
    for k, scores in enumerate(per_vertex_scores):
        if len(scores) == 0:
            raise ValidationError(f"vertex slot {k} has no focal scores")
        arr = np.asarray(scores, dtype=float)
        idx = int(np.argmax(arr))  # argmax returns the first maximum
        values[k] = arr[idx]
        chosen.append(idx)
    field = ScoreField(graph_key=graph.key, vertex_indices=tuple(vertex_indices), values=values)
    return field, chosen


def regional_convolution(
    field: ScoreField,
    graph: ViewGraph,
    config: ConvolutionConfig = ConvolutionConfig(),
) -> ScoreField:
    """Apply ``config.iterations`` rounds of neighbor mean pooling."""
    if field.graph_key != graph.key:
        raise ValidationError(
            f"field graph {field.graph_key!r} does not match {graph.key!r}"
        )
    if max(field.vertex_indices, default=-1) >= len(graph.vertices):
        raise ValidationError("field vertex indices out of range for graph")

    slot = {v: k for k, v in enumerate(field.vertex_indices)}
    neighbor_slots = [
        [slot[j] for j in graph.adjacency[v] if j in slot] for v in field.vertex_indices
    ]

    w = config.weight
    values = field.values.copy()
    for _ in range(config.iterations):
        prev = values
        values = np.empty_like(prev)
        for k, neighbors in enumerate(neighbor_slots):
            total = prev[k] + w * sum(prev[j] for j in neighbors)
            values[k] = total / (w * len(neighbors) + 1.0)
    return replace(field, values=values, iteration=field.iteration + config.iterations)


def quality_score(field: ScoreField) -> float:
    """Maximum of the (smoothed) field."""
    if len(field.values) == 0:
        raise ValidationError("cannot take the max of an empty field")
    return float(field.values.max())


def normalize_quality(raw: float, source_range: tuple[float, float] = (-2.5, 2.5)) -> float:
    """Affine map of ``source_range`` onto [0, 100], clamped outside."""
    lo, hi = source_range
    if lo >= hi:
        raise ConfigError(f"invalid source range [{lo}, {hi}]")
    scaled = (raw - lo) / (hi - lo) * 100.0
    return float(min(100.0, max(0.0, scaled)))
