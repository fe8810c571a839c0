"""Geodesic icosahedron view graphs and camera poses.

Capture locations are the vertices of a level-K icosahedron inscribed in the
unit sphere. Each subdivision round adds one vertex per edge (re-normalized to
the sphere) and splits every triangle into four. Camera poses aim at the
origin and are constrained so that the plane spanned by the up and look-at
vectors contains the vertical axis, which keeps renders free of in-plane roll.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundedInputError, ConfigError, PoleError

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

MAX_LEVEL = 6  # practical cap: level 6 already has 40,962 vertices

_PARALLEL_TOL = 1e-9

# Rows of the base solid before projection onto the unit sphere. The order is
# fixed; downstream vertex indexing depends on it.
_BASE_ROWS = (
    (GOLDEN_RATIO, 1.0, 0.0),
    (-GOLDEN_RATIO, 1.0, 0.0),
    (GOLDEN_RATIO, -1.0, 0.0),
    (-GOLDEN_RATIO, -1.0, 0.0),
    (1.0, 0.0, GOLDEN_RATIO),
    (1.0, 0.0, -GOLDEN_RATIO),
    (-1.0, 0.0, GOLDEN_RATIO),
    (-1.0, 0.0, -GOLDEN_RATIO),
    (0.0, GOLDEN_RATIO, 1.0),
    (0.0, -GOLDEN_RATIO, 1.0),
    (0.0, GOLDEN_RATIO, -1.0),
    (0.0, -GOLDEN_RATIO, -1.0),
)

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def vertical_axis_vector(axis: str) -> np.ndarray:
    try:
        return _AXES[axis].copy()
    except KeyError:
        raise ConfigError(f"vertical axis must be one of x, y, z, got {axis!r}")


@dataclass(frozen=True)
class IcosahedronSpec:
    """Base icosahedron: 12 unit vertices, edge length 2/sqrt(1+phi^2)."""

    golden_ratio: float = GOLDEN_RATIO
    base_vertices: np.ndarray = field(
        default_factory=lambda: np.array(_BASE_ROWS) / math.sqrt(1.0 + GOLDEN_RATIO**2)
    )
    base_edge_length: float = 2.0 / math.sqrt(1.0 + GOLDEN_RATIO**2)


@dataclass(frozen=True)
class CameraPose:
    """Origin-pointing camera. ``matrix`` has columns [-right, up, lookat, position]."""

    position: np.ndarray
    right: np.ndarray
    up: np.ndarray
    lookat: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True)
class ViewGraph:
    """Vertices, edges, faces and adjacency of a level-K geodesic icosahedron.

    ``usable`` is False for vertices parallel to the vertical axis, where the
    pose construction degenerates. Vertex order is deterministic: the 12 base
    vertices first, then one midpoint per edge, appended per level in sorted
    (low index, high index) edge order.
    """

    level: int
    vertical_axis: str
    vertices: np.ndarray  # (N, 3) unit vectors
    edges: tuple[tuple[int, int], ...]
    faces: tuple[tuple[int, int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    usable: np.ndarray  # (N,) bool

    @property
    def key(self) -> str:
        return f"ico-level{self.level}-{self.vertical_axis}"

    @property
    def usable_indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.usable))

    def top_pole_index(self) -> int | None:
        """Index of the unusable vertex on the positive vertical axis, if any."""
        axis = vertical_axis_vector(self.vertical_axis)
        for i in np.flatnonzero(~self.usable):
            if float(self.vertices[i] @ axis) > 0.0:
                return int(i)
        return None

    def capture_indices(self, include_top_pole: bool = False) -> tuple[int, ...]:
        """Vertex indices captured from, in vertex order."""
        indices = set(self.usable_indices)
        if include_top_pole:
            top = self.top_pole_index()
            if top is not None:
                indices.add(top)
        return tuple(sorted(indices))


def _base_faces(vertices: np.ndarray, edges: list[tuple[int, int]]) -> list[tuple[int, int, int]]:
    edge_set = set(edges)
    faces = []
    n = len(vertices)
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edge_set:
                continue
            for c in range(b + 1, n):
                if (a, c) in edge_set and (b, c) in edge_set:
                    faces.append((a, b, c))
    return faces


def _subdivide(
    vertices: list[np.ndarray],
    edges: list[tuple[int, int]],
    faces: list[tuple[int, int, int]],
) -> tuple[list[np.ndarray], list[tuple[int, int]], list[tuple[int, int, int]]]:
    midpoint: dict[tuple[int, int], int] = {}
    for a, b in sorted(edges):
        m = (vertices[a] + vertices[b]) / 2.0
        m = m / np.linalg.norm(m)
        midpoint[(a, b)] = len(vertices)
        vertices.append(m)

    def mid(a: int, b: int) -> int:
        return midpoint[(a, b) if a < b else (b, a)]

    new_edges: list[tuple[int, int]] = []
    for a, b in sorted(edges):
        m = mid(a, b)
        new_edges.append((min(a, m), max(a, m)))
        new_edges.append((min(b, m), max(b, m)))

    new_faces: list[tuple[int, int, int]] = []
    for a, b, c in faces:
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        new_edges.append((min(mab, mbc), max(mab, mbc)))
        new_edges.append((min(mbc, mca), max(mbc, mca)))
        new_edges.append((min(mca, mab), max(mca, mab)))
        new_faces.extend(
            [(a, mab, mca), (b, mbc, mab), (c, mca, mbc), (mab, mbc, mca)]
        )
    return vertices, sorted(set(new_edges)), new_faces


def build_view_graph(level: int, vertical_axis: str = "z") -> ViewGraph:
    """Build the level-K view graph with pole vertices marked unusable."""
    if level < 0:
        raise BoundedInputError("level must be non-negative")
    if level > MAX_LEVEL:
        raise BoundedInputError(f"level {level} exceeds the cap of {MAX_LEVEL}")
    axis = vertical_axis_vector(vertical_axis)

    spec = IcosahedronSpec()
    vertices = [spec.base_vertices[i].copy() for i in range(12)]
    edges = []
    for a in range(12):
        for b in range(a + 1, 12):
            if abs(np.linalg.norm(vertices[a] - vertices[b]) - spec.base_edge_length) < 1e-9:
                edges.append((a, b))
    faces = _base_faces(spec.base_vertices, edges)

    for _ in range(level):
        vertices, edges, faces = _subdivide(vertices, edges, faces)

    verts = np.array(vertices)
    adjacency: list[list[int]] = [[] for _ in range(len(verts))]
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)

    # A vertex is a pole when its component perpendicular to the axis vanishes.
    perp = verts - np.outer(verts @ axis, axis)
    usable = np.linalg.norm(perp, axis=1) >= _PARALLEL_TOL

    return ViewGraph(
        level=level,
        vertical_axis=vertical_axis,
        vertices=verts,
        edges=tuple(edges),
        faces=tuple(faces),
        adjacency=tuple(tuple(sorted(n)) for n in adjacency),
        usable=usable,
    )


def camera_pose(
    viewpoint: np.ndarray,
    radius: float,
    vertical_axis: str = "z",
    fallback_right: np.ndarray | None = None,
) -> CameraPose:
    """Pose at ``radius * viewpoint`` looking at the origin.

    The horizontal (right) vector is u x lookat normalized, with u the unit
    vertical axis, so the up/look-at plane contains the vertical axis. For a
    viewpoint parallel to the axis that cross product vanishes; callers must
    either filter such viewpoints or pass an explicit ``fallback_right``.
    """
    if radius <= 0:
        raise ConfigError("radius must be positive")
    v = np.asarray(viewpoint, dtype=float)
    v = v / np.linalg.norm(v)
    u = vertical_axis_vector(vertical_axis)

    lookat = -v
    cross = np.cross(u, lookat)
    norm = np.linalg.norm(cross)
    if norm < _PARALLEL_TOL:
        if fallback_right is None:
            raise PoleError(
                "viewpoint is parallel to the vertical axis; pose is undefined"
            )
        right = np.asarray(fallback_right, dtype=float)
        right = right / np.linalg.norm(right)
    else:
        right = cross / norm
    up = np.cross(lookat, right)
    position = radius * v
    matrix = np.column_stack([-right, up, lookat, position])
    return CameraPose(position=position, right=right, up=up, lookat=lookat, matrix=matrix)


def capture_locations(
    graph: ViewGraph,
    radius: float,
    include_top_pole: bool = False,
) -> list[CameraPose]:
    """One pose per capture vertex, in vertex order.

    With ``include_top_pole`` the vertex on the positive vertical axis gets a
    pose with a fixed fallback right vector (world x axis, or world y when x
    is the vertical axis), bringing a level-2 z-up graph from 160 to 161
    locations.
    """
    fallback = _AXES["x"] if graph.vertical_axis != "x" else _AXES["y"]
    top = graph.top_pole_index() if include_top_pole else None
    poses = []
    for i in graph.capture_indices(include_top_pole):
        poses.append(
            camera_pose(
                graph.vertices[i],
                radius,
                graph.vertical_axis,
                fallback_right=fallback if i == top else None,
            )
        )
    return poses
