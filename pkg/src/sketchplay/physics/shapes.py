"""Collision shapes: spheres, boxes, and convex prisms.

Boxes and prisms share one convex-polytope representation (vertices plus
outward polygon faces) used by the SAT contact path; spheres stay
analytic.  Inertia tensors are exact for all three (polygon second
moments for prisms).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from ..geometry import Vec3, vcross, vdot, vnorm, vnormalize, vsub

Mat3 = Tuple[Vec3, Vec3, Vec3]


def mat3_invert(m: Mat3) -> Mat3:
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if abs(det) < 1e-300:
        raise ValueError("singular inertia tensor")
    inv = 1.0 / det
    return (
        ((e * i - f * h) * inv, (c * h - b * i) * inv, (b * f - c * e) * inv),
        ((f * g - d * i) * inv, (a * i - c * g) * inv, (c * d - a * f) * inv),
        ((d * h - e * g) * inv, (b * g - a * h) * inv, (a * e - b * d) * inv),
    )


def diag3(x: float, y: float, z: float) -> Mat3:
    return ((x, 0.0, 0.0), (0.0, y, 0.0), (0.0, 0.0, z))


@dataclass(frozen=True)
class Polytope:
    """Convex polytope in the body frame: vertices + outward polygon faces."""

    vertices: tuple           # tuple[Vec3, ...]
    faces: tuple              # tuple[tuple[int, ...], ...] CCW seen from outside
    normals: tuple = field(default=())   # outward unit normal per face
    edge_dirs: tuple = field(default=()) # unique edge directions (unit)

    @staticmethod
    def build(vertices: Sequence[Vec3], faces: Sequence[Tuple[int, ...]]) -> "Polytope":
        normals = []
        for loop in faces:
            a, b, c = vertices[loop[0]], vertices[loop[1]], vertices[loop[2]]
            n = vnormalize(vcross(vsub(b, a), vsub(c, a)))
            normals.append(n)
        edge_dirs: List[Vec3] = []
        for loop in faces:
            for i in range(len(loop)):
                d = vnormalize(vsub(vertices[loop[(i + 1) % len(loop)]], vertices[loop[i]]))
                if vnorm(d) == 0.0:
                    continue
                if not any(abs(vdot(d, e)) > 1.0 - 1e-9 for e in edge_dirs):
                    edge_dirs.append(d)
        return Polytope(
            vertices=tuple(vertices),
            faces=tuple(tuple(f) for f in faces),
            normals=tuple(normals),
            edge_dirs=tuple(edge_dirs),
        )

    def support_local(self, direction: Vec3) -> int:
        best, best_dot = 0, -math.inf
        for i, v in enumerate(self.vertices):
            d = vdot(v, direction)
            if d > best_dot:
                best_dot = d
                best = i
        return best


@dataclass(frozen=True)
class SphereShape:
    radius: float

    @property
    def kind(self) -> str:
        return "sphere"

    def inertia(self, mass: float) -> Mat3:
        i = 0.4 * mass * self.radius * self.radius
        return diag3(i, i, i)

    def bounding_radius(self) -> float:
        return self.radius

    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3


@dataclass(frozen=True)
class BoxShape:
    half_extents: Vec3
    poly: Polytope = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return "box"

    @staticmethod
    def create(half_extents: Vec3) -> "BoxShape":
        hx, hy, hz = half_extents
        verts = [
            (-hx, -hy, -hz), (hx, -hy, -hz), (hx, hy, -hz), (-hx, hy, -hz),
            (-hx, -hy, hz), (hx, -hy, hz), (hx, hy, hz), (-hx, hy, hz),
        ]
        faces = [
            (3, 2, 1, 0),  # -z
            (4, 5, 6, 7),  # +z
            (0, 1, 5, 4),  # -y
            (2, 3, 7, 6),  # +y
            (1, 2, 6, 5),  # +x
            (3, 0, 4, 7),  # -x
        ]
        return BoxShape(half_extents=half_extents, poly=Polytope.build(verts, faces))

    def inertia(self, mass: float) -> Mat3:
        hx, hy, hz = self.half_extents
        w, h, d = 2 * hx, 2 * hy, 2 * hz
        return diag3(
            mass / 12.0 * (h * h + d * d),
            mass / 12.0 * (w * w + d * d),
            mass / 12.0 * (w * w + h * h),
        )

    def bounding_radius(self) -> float:
        return vnorm(self.half_extents)

    def volume(self) -> float:
        hx, hy, hz = self.half_extents
        return 8.0 * hx * hy * hz


def _polygon_moments(outline: Sequence[Tuple[float, float]]):
    """Area, centroid-relative second moments Ix=∫y², Iy=∫x², Ixy=∫xy of a CCW polygon."""
    area = sxx = syy = sxy = cx = cy = 0.0
    n = len(outline)
    for i in range(n):
        x0, y0 = outline[i]
        x1, y1 = outline[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        area += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
        sxx += (x0 * x0 + x0 * x1 + x1 * x1) * cross
        syy += (y0 * y0 + y0 * y1 + y1 * y1) * cross
        sxy += (x0 * y1 + 2 * x0 * y0 + 2 * x1 * y1 + x1 * y0) * cross
    area *= 0.5
    cx /= 6.0 * area
    cy /= 6.0 * area
    ix2 = sxx / 12.0  # ∫x² dA about origin
    iy2 = syy / 12.0  # ∫y² dA
    ixy = sxy / 24.0
    # shift to centroid
    ix2 -= area * cx * cx
    iy2 -= area * cy * cy
    ixy -= area * cx * cy
    return area, (cx, cy), ix2, iy2, ixy


@dataclass(frozen=True)
class PrismShape:
    """Convex outline extruded symmetrically along the body z-axis."""

    outline: tuple  # CCW (x, y) pairs, centered on the outline centroid
    thickness: float
    poly: Polytope = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return "prism"

    @staticmethod
    def create(outline: Sequence[Tuple[float, float]], thickness: float) -> "PrismShape":
        area, (cx, cy), *_ = _polygon_moments(outline)
        if area <= 0:
            raise ValueError("prism outline must be CCW with positive area")
        centered = [(x - cx, y - cy) for x, y in outline]
        n = len(centered)
        half = thickness / 2.0
        verts = [(x, y, -half) for x, y in centered] + [(x, y, half) for x, y in centered]
        faces = [tuple(range(n - 1, -1, -1)), tuple(range(n, 2 * n))]
        for i in range(n):
            j = (i + 1) % n
            faces.append((i, j, n + j, n + i))
        return PrismShape(
            outline=tuple(centered), thickness=thickness,
            poly=Polytope.build(verts, faces),
        )

    def inertia(self, mass: float) -> Mat3:
        area, _, ix2, iy2, ixy = _polygon_moments(self.outline)
        h = self.thickness
        per_area = mass / area
        ixx = per_area * iy2 + mass * h * h / 12.0
        iyy = per_area * ix2 + mass * h * h / 12.0
        izz = per_area * (ix2 + iy2)
        pxy = -per_area * ixy
        return ((ixx, pxy, 0.0), (pxy, iyy, 0.0), (0.0, 0.0, izz))

    def bounding_radius(self) -> float:
        half = self.thickness / 2.0
        return max(math.hypot(x, y, half) for x, y in self.outline)

    def volume(self) -> float:
        area, *_ = _polygon_moments(self.outline)
        return area * self.thickness
