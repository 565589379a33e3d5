"""Deterministic point-splat renderer for interaction images.

Perspective projection of object point sets, painter-ordered splats
(depth-sorted, ties broken by point index), fixed palette: background
(240, 240, 240), active object red, passive blue, obstacles gray,
interaction markers and arrows black. All rasterization is integer, so
output bytes are identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCamera
from .constraints import SpatialConstraint
from .geometry import Pose
from .objects import GRIPPER_ID, Scene, SceneObject
from .primitives import primitive_to_world

BACKGROUND = (240, 240, 240)
ACTIVE_COLOR = (200, 40, 40)
PASSIVE_COLOR = (40, 70, 200)
OBSTACLE_COLOR = (150, 150, 150)
MARKER_COLOR = (0, 0, 0)
GRID_COLOR = (200, 200, 200)

POINT_RADIUS = 1          # px, object splats
MARKER_RADIUS = 2         # px, 5-px interaction point discs
ARROW_LENGTH = 30         # px


@dataclass(frozen=True)
class CameraSpec:
    eye: np.ndarray = field(default_factory=lambda: np.array([0.8, 0.8, 0.6]))
    look_at: np.ndarray = field(default_factory=lambda: np.zeros(3))
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    vertical_fov: float = math.radians(50.0)
    width: int = 320
    height: int = 240

    def __post_init__(self):
        object.__setattr__(self, "eye", np.asarray(self.eye, dtype=float).reshape(3))
        object.__setattr__(self, "look_at",
                           np.asarray(self.look_at, dtype=float).reshape(3))
        object.__setattr__(self, "up", np.asarray(self.up, dtype=float).reshape(3))
        if self.width < 16 or self.height < 16:
            raise ValueError("image dimensions must be >= 16 px")
        if not 0 < self.vertical_fov < math.pi:
            raise ValueError("vertical_fov must be in (0, pi)")

    def with_azimuth(self, azimuth_rad: float) -> "CameraSpec":
        """Camera rotated about the world z axis through look_at."""
        c, s = math.cos(azimuth_rad), math.sin(azimuth_rad)
        rel = self.eye - self.look_at
        rot = np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1], rel[2]])
        return CameraSpec(eye=self.look_at + rot, look_at=self.look_at,
                          up=self.up, vertical_fov=self.vertical_fov,
                          width=self.width, height=self.height)


@dataclass
class RenderedImage:
    width: int
    height: int
    pixels: bytes                 # row-major RGB

    def __post_init__(self):
        if len(self.pixels) != 3 * self.width * self.height:
            raise ValueError("pixel buffer size mismatch")


class _Raster:
    def __init__(self, w: int, h: int):
        self.w = w
        self.h = h
        self.buf = np.empty((h, w, 3), dtype=np.uint8)
        self.buf[:] = BACKGROUND

    def set(self, x: int, y: int, color):
        if 0 <= x < self.w and 0 <= y < self.h:
            self.buf[y, x] = color

    def disc(self, cx: int, cy: int, r: int, color):
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if dx * dx + dy * dy <= r * r:
                    self.set(cx + dx, cy + dy, color)

    def line(self, x0: int, y0: int, x1: int, y1: int, color):
        # Bresenham.
        dx = abs(x1 - x0)
        dy = -abs(y1 - y0)
        sx = 1 if x0 < x1 else -1
        sy = 1 if y0 < y1 else -1
        err = dx + dy
        while True:
            self.set(x0, y0, color)
            if x0 == x1 and y0 == y1:
                break
            e2 = 2 * err
            if e2 >= dy:
                err += dy
                x0 += sx
            if e2 <= dx:
                err += dx
                y0 += sy

    def grid(self, spacing: int, color):
        for x in range(0, self.w, spacing):
            self.buf[:, x] = color
        for y in range(0, self.h, spacing):
            self.buf[y, :] = color


class _Projector:
    def __init__(self, camera: CameraSpec):
        fwd = camera.look_at - camera.eye
        n = np.linalg.norm(fwd)
        if n < 1e-9:
            raise DegenerateCamera("eye coincides with look_at")
        fwd = fwd / n
        right = np.cross(fwd, camera.up)
        rn = np.linalg.norm(right)
        if rn < 1e-9:
            raise DegenerateCamera("up is parallel to the view direction")
        right /= rn
        up = np.cross(right, fwd)
        self.basis = np.stack([right, up, fwd])     # world -> camera rows
        self.eye = camera.eye
        self.f = (camera.height / 2.0) / math.tan(camera.vertical_fov / 2.0)
        self.cx = camera.width / 2.0
        self.cy = camera.height / 2.0

    def project(self, points: np.ndarray):
        """Returns (px int, py int, depth, visible mask) for an (N, 3) array."""
        cam = (points - self.eye) @ self.basis.T
        z = cam[:, 2]
        visible = z > 1e-6
        zs = np.where(visible, z, 1.0)
        px = np.rint(self.cx + self.f * cam[:, 0] / zs).astype(int)
        py = np.rint(self.cy - self.f * cam[:, 1] / zs).astype(int)
        return px, py, z, visible


def _splat_cloud(raster, proj, points, color, radius, items):
    px, py, z, vis = proj.project(points)
    for i in range(len(points)):
        if vis[i]:
            items.append((float(z[i]), len(items), px[i], py[i], radius, color))


def _draw_arrow(raster: _Raster, proj: _Projector, point, direction):
    px, py, z, vis = proj.project(np.array([point, point + 0.02 * direction]))
    if not (vis[0] and vis[1]):
        return
    dx = float(px[1] - px[0])
    dy = float(py[1] - py[0])
    n = math.hypot(dx, dy)
    if n < 1e-9:
        return
    ex = px[0] + int(round(ARROW_LENGTH * dx / n))
    ey = py[0] + int(round(ARROW_LENGTH * dy / n))
    raster.line(px[0], py[0], ex, ey, MARKER_COLOR)
    # Two short head strokes at +-30 degrees back from the tip.
    ang = math.atan2(dy, dx)
    for off in (math.radians(150), math.radians(-150)):
        hx = ex + int(round(8 * math.cos(ang + off)))
        hy = ey + int(round(8 * math.sin(ang + off)))
        raster.line(ex, ey, hx, hy, MARKER_COLOR)


def render_interaction(scene: Scene, candidate: SpatialConstraint,
                       active_at_target: Pose, camera: CameraSpec,
                       grid: bool = False) -> RenderedImage:
    """Render the candidate interaction: all objects splatted, the active
    object drawn at `active_at_target`, primitive points as discs and
    directions as arrows. Byte-exact for identical inputs."""
    raster = _Raster(camera.width, camera.height)
    proj = _Projector(camera)
    if grid:
        raster.grid(max(1, camera.width // 8), GRID_COLOR)

    items: list = []
    active_obj = None
    passive_obj = None
    for obj in scene.objects:
        if obj.id == candidate.active_id:
            shown = SceneObject(object=obj.object, pose=active_at_target,
                                scale=obj.scale, static=obj.static)
            active_obj = shown
            color = ACTIVE_COLOR
        elif obj.id == candidate.passive_id:
            passive_obj = obj
            shown = obj
            color = PASSIVE_COLOR
        elif obj.id == GRIPPER_ID:
            continue
        else:
            shown = obj
            color = OBSTACLE_COLOR
        _splat_cloud(raster, proj, shown.world_points(), color, POINT_RADIUS, items)

    # Painter order: far to near, ties by insertion index.
    for _, _, px, py, radius, color in sorted(
            items, key=lambda it: (-it[0], it[1])):
        raster.disc(px, py, radius, color)

    for prim, obj in ((candidate.active, active_obj),
                      (candidate.passive, passive_obj)):
        if obj is None:
            continue
        point, direction = primitive_to_world(prim, obj)
        px, py, _, vis = proj.project(point.reshape(1, 3))
        if vis[0]:
            raster.disc(int(px[0]), int(py[0]), MARKER_RADIUS, MARKER_COLOR)
        _draw_arrow(raster, proj, point, direction)

    return RenderedImage(camera.width, camera.height, raster.buf.tobytes())


def ppm_bytes(img: RenderedImage) -> bytes:
    """Binary PPM (P6) encoding of the image."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels


def write_ppm(img: RenderedImage, path) -> None:
    """Write the image as binary PPM (P6)."""
    try:
        with open(path, "wb") as fh:
            fh.write(ppm_bytes(img))
    except OSError:
        raise


def read_ppm(path) -> RenderedImage:
    """Read back a binary PPM (P6) written by write_ppm."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or len(parts) < 4:
        raise ValueError(f"not a P6 PPM: {path}")
    w, h = (int(x) for x in parts[1].split())
    return RenderedImage(w, h, parts[3])


def render_svg(scene: Scene, candidate: SpatialConstraint,
               active_at_target: Pose, camera: CameraSpec) -> str:
    """Vector export of the same view: circles for splats, lines for arrows."""
    proj = _Projector(camera)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{camera.width}" '
        f'height="{camera.height}">',
        f'<rect width="100%" height="100%" fill="rgb{BACKGROUND}"/>',
    ]
    for obj in scene.objects:
        if obj.id == GRIPPER_ID:
            continue
        if obj.id == candidate.active_id:
            shown = SceneObject(object=obj.object, pose=active_at_target,
                                scale=obj.scale)
            color = ACTIVE_COLOR
        elif obj.id == candidate.passive_id:
            shown, color = obj, PASSIVE_COLOR
        else:
            shown, color = obj, OBSTACLE_COLOR
        px, py, _, vis = proj.project(shown.world_points())
        for i in range(len(px)):
            if vis[i]:
                parts.append(f'<circle cx="{px[i]}" cy="{py[i]}" r="1.5" '
                             f'fill="rgb{color}"/>')
    for prim_id, prim in ((candidate.active_id, candidate.active),
                          (candidate.passive_id, candidate.passive)):
        obj = scene.get(prim_id)
        if prim_id == candidate.active_id:
            obj = SceneObject(object=obj.object, pose=active_at_target,
                              scale=obj.scale)
        point, direction = primitive_to_world(prim, obj)
        px, py, _, vis = proj.project(
            np.array([point, point + 0.02 * direction]))
        if vis[0]:
            parts.append(f'<circle cx="{px[0]}" cy="{py[0]}" r="3" fill="black"/>')
            if vis[1]:
                dx, dy = float(px[1] - px[0]), float(py[1] - py[0])
                n = math.hypot(dx, dy)
                if n > 1e-9:
                    ex = px[0] + ARROW_LENGTH * dx / n
                    ey = py[0] + ARROW_LENGTH * dy / n
                    parts.append(f'<line x1="{px[0]}" y1="{py[0]}" x2="{ex:.1f}" '
                                 f'y2="{ey:.1f}" stroke="black" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts)
