"""Per-frame edge and depth map rendering from simulation frames.

Analytic ray casting against the body shapes (sphere quadratic, box slab
test, convex prisms by half-space clipping), vectorized over the pixel
grid.  Depth is euclidean distance along the ray, far-plane valued where
nothing is hit; edges are thresholded 4-neighbor depth differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import DegenerateCamera, ParameterOutOfRange
from .geometry import Vec3, qto_matrix, vnorm, vsub
from .physics.collision import StaticPlane
from .physics.shapes import BoxShape, SphereShape
from .physics.world import Frame

DEFAULT_FOV_DEG = 45.0
DEFAULT_RESOLUTION = 512
DEFAULT_EDGE_THRESHOLD = 0.05  # meters
FRAMING_DISTANCE_FACTOR = 2.5  # camera distance = factor * scene bounding radius


@dataclass(frozen=True)
class Camera:
    position: Vec3
    look_at: Vec3
    up: Vec3 = (0.0, 0.0, 1.0)
    fov_deg: float = DEFAULT_FOV_DEG
    width: int = DEFAULT_RESOLUTION
    height: int = DEFAULT_RESOLUTION
    near: float = 0.1
    far: float = 100.0

    def __post_init__(self):
        if self.near <= 0 or self.far <= self.near:
            raise ParameterOutOfRange(f"need 0 < near < far, got {self.near}, {self.far}")
        if self.width < 8 or self.height < 8:
            raise ParameterOutOfRange("image must be at least 8x8")
        if not 0 < self.fov_deg < 180:
            raise ParameterOutOfRange(f"fov {self.fov_deg} not in (0, 180)")
        if vnorm(vsub(self.look_at, self.position)) < 1e-12:
            raise DegenerateCamera("look-at coincides with camera position")


@dataclass(frozen=True)
class DepthMap:
    values: np.ndarray  # (H, W) float64 in [near, far]
    near: float
    far: float


@dataclass(frozen=True)
class EdgeMap:
    values: np.ndarray  # (H, W) uint8 in {0, 1}


def _ray_grid(camera: Camera) -> np.ndarray:
    """Unit ray directions, shape (H, W, 3)."""
    forward = np.array(vsub(camera.look_at, camera.position), dtype=float)
    forward /= np.linalg.norm(forward)
    up = np.array(camera.up, dtype=float)
    right = np.cross(forward, up)
    n = np.linalg.norm(right)
    if n < 1e-12:
        raise DegenerateCamera("up vector is parallel to the view direction")
    right /= n
    true_up = np.cross(right, forward)

    h, w = camera.height, camera.width
    tan_half = math.tan(math.radians(camera.fov_deg) / 2.0)
    aspect = w / h
    xs = (np.arange(w) + 0.5) / w * 2.0 - 1.0
    ys = 1.0 - (np.arange(h) + 0.5) / h * 2.0
    px = xs[None, :, None] * (tan_half * aspect) * right
    py = ys[:, None, None] * tan_half * true_up
    dirs = forward + px + py
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    return dirs


def _intersect_sphere(origin, dirs, center, radius):
    oc = origin - center
    b = np.einsum("hwi,i->hw", dirs, oc)
    c = oc @ oc - radius * radius
    disc = b * b - c
    hit = disc >= 0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    t = -b - sq
    t = np.where(hit & (t > 0), t, np.inf)
    return t


def _intersect_halfspaces(origin_local, dirs_local, normals, offsets):
    """Ray vs intersection of half-spaces dot(n, p) <= offset."""
    h, w, _ = dirs_local.shape
    t_enter = np.zeros((h, w))
    t_exit = np.full((h, w), np.inf)
    miss = np.zeros((h, w), dtype=bool)
    for n, d0 in zip(normals, offsets):
        denom = np.einsum("hwi,i->hw", dirs_local, n)
        num = d0 - origin_local @ n
        parallel = np.abs(denom) < 1e-12
        miss |= parallel & (num < 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / denom
        entering = denom < 0
        t_enter = np.where(~parallel & entering, np.maximum(t_enter, t), t_enter)
        t_exit = np.where(~parallel & ~entering, np.minimum(t_exit, t), t_exit)
    t = np.where(~miss & (t_enter <= t_exit) & (t_exit > 0), np.maximum(t_enter, 0.0), np.inf)
    return t


def _body_halfspaces(shape) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(shape, BoxShape):
        hx, hy, hz = shape.half_extents
        normals = np.array([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], dtype=float)
        offsets = np.array([hx, hx, hy, hy, hz, hz], dtype=float)
        return normals, offsets
    poly = shape.poly
    normals = np.array(poly.normals, dtype=float)
    offsets = np.array(
        [np.dot(poly.normals[i], poly.vertices[loop[0]]) for i, loop in enumerate(poly.faces)]
    )
    return normals, offsets


def render_depth(
    frame: Frame,
    shapes: Dict[str, object],
    camera: Camera,
    planes: Sequence[StaticPlane] = (),
) -> DepthMap:
    """Z-buffered analytic ray casting; nearest hit per pixel wins."""
    dirs = _ray_grid(camera)
    origin = np.array(camera.position, dtype=float)
    best = np.full((camera.height, camera.width), np.inf)

    for snap in frame.bodies:
        shape = shapes.get(snap.id)
        if shape is None:
            continue
        if isinstance(shape, SphereShape):
            t = _intersect_sphere(origin, dirs, np.array(snap.position), shape.radius)
        else:
            rot = np.array(qto_matrix(snap.orientation))
            origin_local = rot.T @ (origin - np.array(snap.position))
            dirs_local = np.einsum("ij,hwj->hwi", rot.T, dirs)
            normals, offsets = _body_halfspaces(shape)
            t = _intersect_halfspaces(origin_local, dirs_local, normals, offsets)
        best = np.minimum(best, t)

    for plane in planes:
        n = np.array(plane.normal, dtype=float)
        denom = np.einsum("hwi,i->hw", dirs, n)
        num = plane.offset - origin @ n
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / denom
        t = np.where((np.abs(denom) > 1e-12) & (t > 0), t, np.inf)
        best = np.minimum(best, t)

    best = np.where(best < camera.near, np.inf, best)
    depth = np.where(np.isfinite(best), np.minimum(best, camera.far), camera.far)
    return DepthMap(values=depth, near=camera.near, far=camera.far)


def render_edges(depth: DepthMap, threshold: float = DEFAULT_EDGE_THRESHOLD) -> EdgeMap:
    """Edge where the max absolute 4-neighbor depth difference exceeds threshold."""
    if threshold <= 0:
        raise ParameterOutOfRange("threshold must be positive")
    d = depth.values
    diff = np.zeros_like(d)
    diff[:, 1:] = np.maximum(diff[:, 1:], np.abs(d[:, 1:] - d[:, :-1]))
    diff[:, :-1] = np.maximum(diff[:, :-1], np.abs(d[:, :-1] - d[:, 1:]))
    diff[1:, :] = np.maximum(diff[1:, :], np.abs(d[1:, :] - d[:-1, :]))
    diff[:-1, :] = np.maximum(diff[:-1, :], np.abs(d[:-1, :] - d[1:, :]))
    return EdgeMap(values=(diff > threshold).astype(np.uint8))


def frame_scene_camera(
    frames: Sequence[Frame],
    shapes: Dict[str, object],
    width: int = DEFAULT_RESOLUTION,
    height: int = DEFAULT_RESOLUTION,
) -> Camera:
    """Auto-position the default camera to frame the whole motion."""
    points = []
    radius = 0.0
    for frame in frames:
        for snap in frame.bodies:
            shape = shapes.get(snap.id)
            points.append(snap.position)
            if shape is not None:
                radius = max(radius, shape.bounding_radius())
        for node_list in frame.node_positions.values():
            points.extend(node_list)
    if not points:
        center = (0.0, 0.0, 0.0)
        scene_radius = 1.0
    else:
        arr = np.array(points)
        center = arr.mean(axis=0)
        scene_radius = float(np.linalg.norm(arr - center, axis=1).max()) + radius
        scene_radius = max(scene_radius, 0.5)
        center = tuple(float(c) for c in center)
    distance = FRAMING_DISTANCE_FACTOR * scene_radius
    position = (center[0], center[1] - distance, center[2] + 0.3 * scene_radius)
    return Camera(
        position=position,
        look_at=center,
        width=width,
        height=height,
        near=max(0.01, 0.05 * distance),
        far=max(10.0 * scene_radius, distance + 4.0 * scene_radius),
    )


def encode_pgm16(depth: DepthMap) -> bytes:
    """16-bit binary PGM; value = round(65535 * (d - near) / (far - near))."""
    scaled = np.round(
        65535.0 * (depth.values - depth.near) / (depth.far - depth.near)
    ).astype(">u2")
    h, w = scaled.shape
    return f"P5\n{w} {h}\n65535\n".encode("ascii") + scaled.tobytes()


def encode_pgm8(edges: EdgeMap) -> bytes:
    img = (edges.values * 255).astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def prior_filenames(frame_index: int) -> Tuple[str, str]:
    return f"depth_{frame_index:06d}.pgm", f"edge_{frame_index:06d}.pgm"
