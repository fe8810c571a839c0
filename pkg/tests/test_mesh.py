import numpy as np
import pytest

from meshscore.errors import (
    DegenerateGeometryError,
    EmptyMeshError,
    MeshParseError,
    MissingTextureError,
)
from meshscore.mesh import TexturedMesh, load_mesh, normalize_mesh, save_tmesh

from helpers import cube_positions, cube_triangles, write_cube_obj


def test_load_textured_cube(cube_obj_path):
    mesh = load_mesh(cube_obj_path)
    assert mesh.triangle_count == 12
    assert mesh.texture is not None and mesh.texture.shape == (8, 8, 3)
    assert mesh.uvs.shape == (12, 3, 2)
    assert len(mesh.positions) == 8


def test_load_untextured_obj(tmp_path):
    path = write_cube_obj(tmp_path, name="plain", textured=False)
    mesh = load_mesh(path)
    assert mesh.texture is None
    assert mesh.uvs is None
    assert mesh.fallback_color == (128, 128, 128)


def test_zero_faces_is_empty_mesh_error(tmp_path):
    path = tmp_path / "points.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\n", encoding="utf-8")
    with pytest.raises(EmptyMeshError):
        load_mesh(path)


def test_missing_texture_names_path(tmp_path):
    path = write_cube_obj(tmp_path, name="broken")
    (tmp_path / "broken.png").unlink()
    with pytest.raises(MissingTextureError) as info:
        load_mesh(path)
    assert "broken.png" in str(info.value)


def test_out_of_range_face_index(tmp_path):
    path = tmp_path / "bad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n", encoding="utf-8")
    with pytest.raises(MeshParseError, match="bad.obj:4"):
        load_mesh(path)


def test_negative_indices_and_quads(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text(
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n", encoding="utf-8"
    )
    mesh = load_mesh(path)
    assert mesh.triangle_count == 2  # fan-triangulated quad


def test_missing_file():
    with pytest.raises(MeshParseError):
        load_mesh("/nonexistent/thing.obj")


def test_tmesh_roundtrip(tmp_path):
    path = tmp_path / "tri.tmesh"
    positions = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    colors = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    save_tmesh(path, positions, [[0, 1, 2]], colors)
    mesh = load_mesh(path)
    assert mesh.triangle_count == 1
    assert np.allclose(mesh.positions, positions)
    assert np.allclose(mesh.vertex_colors, colors)


def test_tmesh_bad_magic(tmp_path):
    path = tmp_path / "junk.tmesh"
    path.write_bytes(b"not a mesh at all")
    with pytest.raises(MeshParseError):
        load_mesh(path)


def test_normalize_cube_spanning_0_2():
    mesh = TexturedMesh(positions=cube_positions((1, 1, 1), 2.0), triangles=cube_triangles())
    out, transform = normalize_mesh(mesh)
    assert np.allclose(out.positions.min(axis=0), [-1, -1, -1], atol=1e-6)
    assert np.allclose(out.positions.max(axis=0), [1, 1, 1], atol=1e-6)
    assert np.allclose(transform.translation, [-1, -1, -1])
    assert transform.uniform_scale == pytest.approx(1.0)


def test_normalize_identity_when_already_canonical():
    mesh = TexturedMesh(positions=cube_positions((0, 0, 0), 2.0), triangles=cube_triangles())
    out, transform = normalize_mesh(mesh)
    assert np.allclose(out.positions, mesh.positions, atol=1e-9)
    assert np.allclose(transform.translation, [0, 0, 0])
    assert transform.uniform_scale == pytest.approx(1.0)


def test_normalize_flat_quad():
    positions = np.array([[0, 0, 0], [4, 0, 0], [4, 2, 0], [0, 2, 0]], dtype=float)
    triangles = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    out, transform = normalize_mesh(TexturedMesh(positions=positions, triangles=triangles))
    assert transform.uniform_scale == pytest.approx(0.5)
    assert np.allclose(out.positions[:, 0].min(), -1)
    assert np.allclose(out.positions[:, 0].max(), 1)
    assert np.allclose(out.positions[:, 1], [-0.5, -0.5, 0.5, 0.5])
    assert np.allclose(out.positions[:, 2], 0.0)


def test_normalize_idempotent():
    rng = np.random.default_rng(2)
    positions = rng.uniform(-3, 7, size=(20, 3))
    triangles = np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int32)
    once, _ = normalize_mesh(TexturedMesh(positions=positions, triangles=triangles))
    twice, _ = normalize_mesh(once)
    assert np.abs(twice.positions - once.positions).max() < 1e-6


def test_normalize_preserves_edge_ratios():
    mesh = TexturedMesh(positions=cube_positions((3, -2, 9), 5.0), triangles=cube_triangles())
    out, _ = normalize_mesh(mesh)

    def edge_lengths(m):
        p = m.positions
        return np.array(
            [np.linalg.norm(p[a] - p[b]) for a, b, _ in m.triangles]
        )

    before = edge_lengths(mesh)
    after = edge_lengths(out)
    ratio = after / before
    assert np.abs(ratio - ratio[0]).max() < 1e-9


def test_normalize_degenerate_rejected():
    positions = np.zeros((3, 3))
    triangles = np.array([[0, 1, 2]], dtype=np.int32)
    with pytest.raises(DegenerateGeometryError):
        normalize_mesh(TexturedMesh(positions=positions, triangles=triangles))


def test_triangle_index_validation():
    with pytest.raises(MeshParseError):
        TexturedMesh(
            positions=np.zeros((2, 3)), triangles=np.array([[0, 1, 2]], dtype=np.int32)
        )


def test_mesh_arrays_are_immutable(cube_obj_path):
    mesh = load_mesh(cube_obj_path)
    with pytest.raises(ValueError):
        mesh.positions[0, 0] = 99.0
