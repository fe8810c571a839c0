"""Unlit software rasterizer: z-buffer, perspective-correct texturing.

Projection is a pinhole with half field-of-view arctan(sensor_half_width /
focal); longer focals magnify. Shading is the diffuse texture (or vertex
color) only: no lights, no shadows, no back-face culling. The per-pixel loop
is a compiled numba kernel with a fixed evaluation order, which keeps frames
bit-identical across runs and makes renders scale across threads (the kernel
runs without the GIL).

Triangles with any vertex closer than a small epsilon in front of the camera
are discarded instead of clipped; capture poses orbit at radius 2.2 around
meshes inside the [-1, 1] cube, so the near plane is never reached there.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
from PIL import Image

from .errors import ConfigError
from .geometry import CameraPose
from .mesh import TexturedMesh

DEFAULT_FOCALS = (3.0, 4.0, 5.0, 6.0, 7.5)

_NEAR = 1e-6

_EMPTY_UVS = np.zeros((1, 3, 2))
_EMPTY_TEXTURE = np.zeros((1, 1, 3))
_EMPTY_COLORS = np.zeros((1, 3))


@dataclass(frozen=True)
class RenderConfig:
    resolution: int = 512
    focal_lengths: tuple[float, ...] = DEFAULT_FOCALS
    sensor_half_width: float = 1.5
    background: tuple[int, int, int] = (255, 255, 255)
    texture_filter: str = "bilinear"

    def __post_init__(self):
        if self.resolution < 16:
            raise ConfigError("resolution must be at least 16")
        if not self.focal_lengths:
            raise ConfigError("need at least one focal length")
        if any(f <= 0 for f in self.focal_lengths):
            raise ConfigError("focal lengths must be positive")
        if any(b >= a for a, b in zip(self.focal_lengths[1:], self.focal_lengths)):
            raise ConfigError("focal lengths must be strictly increasing")
        if self.sensor_half_width <= 0:
            raise ConfigError("sensor_half_width must be positive")
        if self.texture_filter not in ("nearest", "bilinear"):
            raise ConfigError("texture_filter must be 'nearest' or 'bilinear'")


@dataclass(frozen=True)
class Frame:
    pixels: np.ndarray  # (res, res, 3) uint8
    coverage: float

    def __post_init__(self):
        pixels = np.ascontiguousarray(self.pixels)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)


def render(mesh: TexturedMesh, pose: CameraPose, focal: float, config: RenderConfig) -> Frame:
    res = config.resolution
    color = np.empty((res, res, 3))
    color[:] = config.background
    invz_buf = np.zeros((res, res))

    if mesh.triangle_count:
        # world -> camera: rows are the image-right, image-up and view axes
        rot = np.stack([pose.matrix[:, 0], pose.up, pose.lookat])
        cam = (mesh.positions - pose.position) @ rot.T
        scale = focal / config.sensor_half_width

        z = cam[:, 2]
        front = z > _NEAR
        # pixel-center coordinates: pixel (row, col) center sits at (col, row)
        with np.errstate(divide="ignore", invalid="ignore"):
            ndc = scale * cam[:, :2] / z[:, None]
        px = (ndc[:, 0] + 1.0) * 0.5 * res - 0.5
        py = (1.0 - ndc[:, 1]) * 0.5 * res - 0.5
        invz = np.where(front, 1.0 / np.where(front, z, 1.0), 0.0)
        px = np.where(front, px, 0.0)
        py = np.where(front, py, 0.0)

        # near-to-far order: occluded triangles fail the depth test instead
        # of being shaded; the z-buffer keeps the result order-independent
        order = np.argsort(z[mesh.triangles].mean(axis=1), kind="stable")

        if mesh.texture is not None:
            mode = 2 if config.texture_filter == "bilinear" else 1
            uvs, texture = mesh.uvs, mesh.texture.astype(float)
            colors255 = _EMPTY_COLORS
        elif mesh.vertex_colors is not None:
            mode = 3
            uvs, texture = _EMPTY_UVS, _EMPTY_TEXTURE
            colors255 = mesh.vertex_colors * 255.0
        else:
            mode = 0
            uvs, texture = _EMPTY_UVS, _EMPTY_TEXTURE
            colors255 = _EMPTY_COLORS

        _raster_frame(
            order,
            np.ascontiguousarray(mesh.triangles),
            px, py, invz, front,
            np.ascontiguousarray(uvs),
            np.ascontiguousarray(texture),
            np.ascontiguousarray(colors255),
            np.asarray(mesh.fallback_color, dtype=float),
            mode,
            color,
            invz_buf,
        )

    pixels = np.clip(np.rint(color), 0, 255).astype(np.uint8)
    return Frame(pixels=pixels, coverage=float((invz_buf > 0.0).mean()))


@numba.njit(cache=True)
def _raster_frame(
    order, tris, px, py, invz, front, uvs, texture, colors255, fallback, mode, color, zbuf
):
    res = color.shape[0]
    th, tw = texture.shape[0], texture.shape[1]
    for oi in range(len(order)):
        t = order[oi]
        a, b, c = tris[t, 0], tris[t, 1], tris[t, 2]
        if not (front[a] and front[b] and front[c]):
            continue
        ax_, ay_, bx_, by_, cx_, cy_ = px[a], py[a], px[b], py[b], px[c], py[c]
        area = (bx_ - ax_) * (cy_ - ay_) - (by_ - ay_) * (cx_ - ax_)
        if abs(area) < 1e-12:
            continue
        inv_area = 1.0 / area

        x0 = int(max(0.0, np.floor(min(ax_, bx_, cx_))))
        x1 = int(min(res - 1.0, np.ceil(max(ax_, bx_, cx_))))
        y0 = int(max(0.0, np.floor(min(ay_, by_, cy_))))
        y1 = int(min(res - 1.0, np.ceil(max(ay_, by_, cy_))))
        if x0 > x1 or y0 > y1:
            continue

        iza, izb, izc = invz[a], invz[b], invz[c]
        e0x = (by_ - cy_) * inv_area
        e0y = (cx_ - bx_) * inv_area
        e1x = (cy_ - ay_) * inv_area
        e1y = (ax_ - cx_) * inv_area

        for row in range(y0, y1 + 1):
            fy = float(row)
            for col in range(x0, x1 + 1):
                fx = float(col)
                l0 = (fx - bx_) * e0x + (fy - by_) * e0y
                if l0 < 0.0:
                    continue
                l1 = (fx - cx_) * e1x + (fy - cy_) * e1y
                if l1 < 0.0:
                    continue
                l2 = 1.0 - l0 - l1
                if l2 < 0.0:
                    continue
                iz = l0 * iza + l1 * izb + l2 * izc
                if iz <= zbuf[row, col]:
                    continue
                zbuf[row, col] = iz

                if mode == 0:
                    color[row, col, 0] = fallback[0]
                    color[row, col, 1] = fallback[1]
                    color[row, col, 2] = fallback[2]
                elif mode == 3:
                    w0, w1, w2 = l0 * iza / iz, l1 * izb / iz, l2 * izc / iz
                    for ch in range(3):
                        color[row, col, ch] = (
                            w0 * colors255[a, ch]
                            + w1 * colors255[b, ch]
                            + w2 * colors255[c, ch]
                        )
                else:
                    w0, w1, w2 = l0 * iza / iz, l1 * izb / iz, l2 * izc / iz
                    u = w0 * uvs[t, 0, 0] + w1 * uvs[t, 1, 0] + w2 * uvs[t, 2, 0]
                    v = w0 * uvs[t, 0, 1] + w1 * uvs[t, 1, 1] + w2 * uvs[t, 2, 1]
                    u = min(1.0, max(0.0, u))
                    v = min(1.0, max(0.0, v))
                    if mode == 1:  # nearest
                        xi = min(int(u * tw), tw - 1)
                        yi = min(int((1.0 - v) * th), th - 1)
                        color[row, col, 0] = texture[yi, xi, 0]
                        color[row, col, 1] = texture[yi, xi, 1]
                        color[row, col, 2] = texture[yi, xi, 2]
                    else:  # bilinear with clamp addressing
                        fxt = u * tw - 0.5
                        fyt = (1.0 - v) * th - 0.5
                        xf = np.floor(fxt)
                        yf = np.floor(fyt)
                        xi0 = min(tw - 1, max(0, int(xf)))
                        yi0 = min(th - 1, max(0, int(yf)))
                        xi1 = min(xi0 + 1, tw - 1)
                        yi1 = min(yi0 + 1, th - 1)
                        wx = min(1.0, max(0.0, fxt - xi0))
                        wy = min(1.0, max(0.0, fyt - yi0))
                        for ch in range(3):
                            top = texture[yi0, xi0, ch] * (1.0 - wx) + texture[yi0, xi1, ch] * wx
                            bot = texture[yi1, xi0, ch] * (1.0 - wx) + texture[yi1, xi1, ch] * wx
                            color[row, col, ch] = top * (1.0 - wy) + bot * wy


def multi_focal_capture(mesh: TexturedMesh, pose: CameraPose, config: RenderConfig) -> list[Frame]:
    """One frame per configured focal length, in configuration order."""
    return [render(mesh, pose, focal, config) for focal in config.focal_lengths]


def save_frame_png(frame: Frame, path: str | Path) -> None:
    Image.fromarray(frame.pixels).save(path, format="PNG")


def frame_png_bytes(frame: Frame) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(frame.pixels).save(buf, format="PNG")
    return buf.getvalue()
