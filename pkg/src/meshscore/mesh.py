"""Textured triangle meshes: loading and canonical-cube normalization.

Two input formats are supported:

* Wavefront OBJ with an optional MTL sidecar; the diffuse texture map of the
  first used material is bound. Texture images may be PNG or JPEG, RGB or
  RGBA (alpha is dropped).
* A minimal binary fixture format (``.tmesh``) for test geometry: the magic
  bytes ``TMESH1\\n``, three little-endian uint32 values (vertex count,
  triangle count, flags), float32 positions (n, 3), uint32 triangle indices
  (m, 3), and, when flag bit 0 is set, float32 per-vertex RGB colors in
  [0, 1]. No texture support.

Meshes without any color source render with a uniform mid-gray fallback so
collapsed generations still score instead of crashing the pipeline.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DegenerateGeometryError,
    EmptyMeshError,
    MeshParseError,
    MissingTextureError,
    ValidationError,
)

TMESH_MAGIC = b"TMESH1\n"
FALLBACK_GRAY = (128, 128, 128)


@dataclass(frozen=True)
class TexturedMesh:
    positions: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int32
    uvs: np.ndarray | None = None  # (m, 3, 2) per-corner
    texture: np.ndarray | None = None  # (h, w, 3) uint8
    vertex_colors: np.ndarray | None = None  # (n, 3) float in [0, 1]
    fallback_color: tuple[int, int, int] = FALLBACK_GRAY

    def __post_init__(self):
        for name in ("positions", "triangles", "uvs", "texture", "vertex_colors"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.ascontiguousarray(arr)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)
        if len(self.triangles) and self.triangles.max() >= len(self.positions):
            raise MeshParseError("triangle index out of range")
        if self.texture is not None and self.uvs is None:
            raise MeshParseError("textured mesh needs per-corner UVs")

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)


@dataclass(frozen=True)
class NormalizationTransform:
    """Apply as (p + translation) * uniform_scale."""

    translation: np.ndarray
    uniform_scale: float


def load_mesh(path: str | Path) -> TexturedMesh:
    path = Path(path)
    if not path.exists():
        raise MeshParseError(f"mesh file not found: {path}")
    if path.suffix.lower() == ".tmesh":
        mesh = _load_tmesh(path)
    else:
        mesh = _load_obj(path)
    if mesh.triangle_count == 0:
        raise EmptyMeshError(f"{path.name} has no triangles")
    return mesh


def normalize_mesh(mesh: TexturedMesh) -> tuple[TexturedMesh, NormalizationTransform]:
    """Center the bounding box at the origin and scale the largest extent to 2.

    The scale is uniform across axes, preserving aspect ratios.
    """
    if mesh.triangle_count == 0 or len(mesh.positions) == 0:
        raise EmptyMeshError("cannot normalize an empty mesh")
    if not np.isfinite(mesh.positions).all():
        raise ValidationError("mesh has non-finite coordinates")
    lo = mesh.positions.min(axis=0)
    hi = mesh.positions.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0.0:
        raise DegenerateGeometryError("mesh has zero extent on all axes")
    center = (hi + lo) / 2.0
    scale = 2.0 / extent
    transform = NormalizationTransform(translation=-center, uniform_scale=scale)
    positions = (mesh.positions + transform.translation) * transform.uniform_scale
    return replace(mesh, positions=positions), transform


# --- OBJ ---------------------------------------------------------------------


def _load_obj(path: Path) -> TexturedMesh:
    positions: list[list[float]] = []
    texcoords: list[list[float]] = []
    face_pos: list[list[int]] = []
    face_uv: list[list[int | None]] = []
    mtl_files: list[str] = []
    used_materials: list[str] = []

    with path.open(encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            tokens = raw.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            kind = tokens[0]
            try:
                if kind == "v":
                    positions.append([float(t) for t in tokens[1:4]])
                elif kind == "vt":
                    texcoords.append([float(t) for t in tokens[1:3]])
                elif kind == "mtllib":
                    mtl_files.extend(tokens[1:])
                elif kind == "usemtl" and len(tokens) > 1:
                    used_materials.append(tokens[1])
                elif kind == "f":
                    corners = [_parse_corner(t, len(positions), len(texcoords)) for t in tokens[1:]]
                    if len(corners) < 3:
                        raise ValueError("face with fewer than 3 corners")
                    for k in range(1, len(corners) - 1):  # fan triangulation
                        tri = [corners[0], corners[k], corners[k + 1]]
                        face_pos.append([c[0] for c in tri])
                        face_uv.append([c[1] for c in tri])
            except (ValueError, IndexError) as err:
                raise MeshParseError(f"{path.name}:{lineno}: {err}") from err

    texture = _resolve_texture(path, mtl_files, used_materials)

    uvs = None
    if texture is not None:
        uvs = np.zeros((len(face_uv), 3, 2))
        for i, corners in enumerate(face_uv):
            for k, uv_idx in enumerate(corners):
                if uv_idx is None:
                    raise MeshParseError(
                        f"{path.name}: face {i} lacks texture coordinates but a texture is bound"
                    )
                uvs[i, k] = texcoords[uv_idx]

    return TexturedMesh(
        positions=np.asarray(positions, dtype=float).reshape(-1, 3),
        triangles=np.asarray(face_pos, dtype=np.int32).reshape(-1, 3),
        uvs=uvs,
        texture=texture,
    )


def _parse_corner(token: str, n_pos: int, n_uv: int) -> tuple[int, int | None]:
    parts = token.split("/")
    pos = int(parts[0])
    pos = pos - 1 if pos > 0 else n_pos + pos
    if pos < 0 or pos >= n_pos:
        raise ValueError(f"vertex index {parts[0]} out of range")
    uv = None
    if len(parts) > 1 and parts[1]:
        uv = int(parts[1])
        uv = uv - 1 if uv > 0 else n_uv + uv
        if uv < 0 or uv >= n_uv:
            raise ValueError(f"uv index {parts[1]} out of range")
    return pos, uv


def _resolve_texture(obj_path: Path, mtl_files: list[str], used: list[str]) -> np.ndarray | None:
    texture_name = None
    for mtl_name in mtl_files:
        mtl_path = obj_path.parent / mtl_name
        if not mtl_path.exists():
            continue
        materials = _parse_mtl(mtl_path)
        for name in used or list(materials):
            if materials.get(name):
                texture_name = materials[name]
                break
        if texture_name:
            break
    if texture_name is None:
        return None
    tex_path = obj_path.parent / texture_name
    if not tex_path.exists():
        raise MissingTextureError(tex_path)
    with Image.open(tex_path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def _parse_mtl(path: Path) -> dict[str, str | None]:
    materials: dict[str, str | None] = {}
    current = None
    with path.open(encoding="utf-8", errors="replace") as fh:
        for raw in fh:
            tokens = raw.split()
            if not tokens:
                continue
            if tokens[0] == "newmtl" and len(tokens) > 1:
                current = tokens[1]
                materials[current] = None
            elif tokens[0] == "map_Kd" and len(tokens) > 1 and current is not None:
                materials[current] = tokens[-1]
    return materials


# --- binary fixture format ------------------------------------------------------


def save_tmesh(
    path: str | Path,
    positions: np.ndarray,
    triangles: np.ndarray,
    vertex_colors: np.ndarray | None = None,
) -> None:
    positions = np.asarray(positions, dtype=np.float32).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=np.uint32).reshape(-1, 3)
    flags = 1 if vertex_colors is not None else 0
    with Path(path).open("wb") as fh:
        fh.write(TMESH_MAGIC)
        fh.write(struct.pack("<III", len(positions), len(triangles), flags))
        fh.write(positions.tobytes())
        fh.write(triangles.tobytes())
        if vertex_colors is not None:
            fh.write(np.asarray(vertex_colors, dtype=np.float32).reshape(-1, 3).tobytes())


def _load_tmesh(path: Path) -> TexturedMesh:
    data = path.read_bytes()
    if not data.startswith(TMESH_MAGIC):
        raise MeshParseError(f"{path.name}: bad magic bytes")
    offset = len(TMESH_MAGIC)
    try:
        n, m, flags = struct.unpack_from("<III", data, offset)
        offset += 12
        positions = np.frombuffer(data, dtype=np.float32, count=n * 3, offset=offset)
        offset += n * 12
        triangles = np.frombuffer(data, dtype=np.uint32, count=m * 3, offset=offset)
        offset += m * 12
        colors = None
        if flags & 1:
            colors = np.frombuffer(data, dtype=np.float32, count=n * 3, offset=offset)
            colors = colors.reshape(-1, 3).astype(float)
    except (struct.error, ValueError) as err:
        raise MeshParseError(f"{path.name}: truncated file ({err})") from err
    return TexturedMesh(
        positions=positions.reshape(-1, 3).astype(float),
        triangles=triangles.reshape(-1, 3).astype(np.int32),
        vertex_colors=colors,
    )
