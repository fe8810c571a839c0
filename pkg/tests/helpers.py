import numpy as np
from PIL import Image

from meshscore.mesh import TexturedMesh

CUBE_QUADS = (
    (0, 1, 2, 3),  # z = -1
    (4, 5, 6, 7),  # z = +1
    (0, 1, 5, 4),  # y = -1
    (1, 2, 6, 5),  # x = +1
    (2, 3, 7, 6),  # y = +1
    (3, 0, 4, 7),  # x = -1
)


def cube_positions(center=(0.0, 0.0, 0.0), side=1.0):
    h = side / 2.0
    cx, cy, cz = center
    corners = [
        (-h, -h, -h), (h, -h, -h), (h, h, -h), (-h, h, -h),
        (-h, -h, h), (h, -h, h), (h, h, h), (-h, h, h),
    ]
    return np.array([(cx + x, cy + y, cz + z) for x, y, z in corners])


def cube_triangles():
    tris = []
    for a, b, c, d in CUBE_QUADS:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return np.array(tris, dtype=np.int32)


def cube_uvs():
    quad_uv = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    uvs = []
    for _ in CUBE_QUADS:
        uvs.append(quad_uv[[0, 1, 2]])
        uvs.append(quad_uv[[0, 2, 3]])
    return np.array(uvs)


def checker_texture(size=8):
    tex = np.zeros((size, size, 3), dtype=np.uint8)
    for y in range(size):
        for x in range(size):
            tex[y, x] = (200, 40, 40) if (x + y) % 2 == 0 else (40, 40, 200)
    return tex


def make_cube_mesh(center=(0.0, 0.0, 0.0), side=1.0, textured=False, colorful=False):
    kwargs = {}
    if textured:
        kwargs["uvs"] = cube_uvs()
        kwargs["texture"] = checker_texture()
    if colorful:
        rng = np.random.default_rng(0)
        kwargs["vertex_colors"] = rng.uniform(0.2, 0.9, size=(8, 3))
    return TexturedMesh(
        positions=cube_positions(center, side),
        triangles=cube_triangles(),
        **kwargs,
    )


def write_cube_obj(directory, name="cube", side=2.0, offset=(1.0, 1.0, 1.0), textured=True):
    """Cube spanning [offset-side/2, offset+side/2] per axis, with MTL + PNG."""
    obj_path = directory / f"{name}.obj"
    lines = [f"mtllib {name}.mtl"] if textured else []
    for x, y, z in cube_positions(offset, side):
        lines.append(f"v {x} {y} {z}")
    lines.append("vt 0 0")
    lines.append("vt 1 0")
    lines.append("vt 1 1")
    lines.append("vt 0 1")
    if textured:
        lines.append("usemtl checker")
    for a, b, c, d in CUBE_QUADS:
        if textured:
            lines.append(f"f {a + 1}/1 {b + 1}/2 {c + 1}/3")
            lines.append(f"f {a + 1}/1 {c + 1}/3 {d + 1}/4")
        else:
            lines.append(f"f {a + 1} {b + 1} {c + 1}")
            lines.append(f"f {a + 1} {c + 1} {d + 1}")
    obj_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if textured:
        (directory / f"{name}.mtl").write_text(
            f"newmtl checker\nKd 1 1 1\nmap_Kd {name}.png\n", encoding="utf-8"
        )
        Image.fromarray(checker_texture()).save(directory / f"{name}.png")
    return obj_path
