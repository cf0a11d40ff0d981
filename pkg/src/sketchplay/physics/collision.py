"""Contact generation: analytic sphere/plane pairs, SAT + face clipping
for convex polytopes (boxes and prisms).

Contact normals point from body A toward body B; penetration is positive
when the shapes overlap.  Static plane colliders enter as body B with
infinite mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from ..geometry import (
    Vec3,
    qrotate,
    qrotate_inv,
    vadd,
    vcross,
    vdot,
    vnorm,
    vnormalize,
    vscale,
    vsub,
)
from .shapes import Polytope

FACE_PREFERENCE_EPS = 1e-5  # prefer face axes over edge axes within this margin
PARALLEL_EDGE_EPS = 1e-9
MAX_MANIFOLD_POINTS = 4


@dataclass
class ContactPoint:
    point: Vec3
    normal: Vec3       # from A toward B
    penetration: float


@dataclass(frozen=True)
class StaticPlane:
    """Half-space z <= offset along `normal`; normal points out of the solid."""

    normal: Vec3
    offset: float
    friction_mu: float = 0.8
    restitution_e: float = 0.0

    def signed_distance(self, p: Vec3) -> float:
        return vdot(self.normal, p) - self.offset


def collide_sphere_sphere(pa: Vec3, ra: float, pb: Vec3, rb: float) -> List[ContactPoint]:
    d = vsub(pb, pa)
    dist = vnorm(d)
    pen = ra + rb - dist
    if pen <= 0:
        return []
    n = vscale(d, 1.0 / dist) if dist > 1e-12 else (0.0, 0.0, 1.0)
    point = vadd(pa, vscale(n, ra - 0.5 * pen))
    return [ContactPoint(point=point, normal=n, penetration=pen)]


def collide_sphere_plane(p: Vec3, r: float, plane: StaticPlane) -> List[ContactPoint]:
    dist = plane.signed_distance(p)
    pen = r - dist
    if pen <= 0:
        return []
    n = vscale(plane.normal, -1.0)  # from body toward the plane
    point = vadd(p, vscale(n, r - 0.5 * pen))
    return [ContactPoint(point=point, normal=n, penetration=pen)]


def world_vertices(poly: Polytope, pos: Vec3, quat) -> List[Vec3]:
    return [vadd(qrotate(quat, v), pos) for v in poly.vertices]


def collide_polytope_plane(poly: Polytope, pos: Vec3, quat, plane: StaticPlane) -> List[ContactPoint]:
    n = vscale(plane.normal, -1.0)
    out = []
    for v in world_vertices(poly, pos, quat):
        pen = -plane.signed_distance(v)
        if pen > 0:
            out.append(ContactPoint(point=v, normal=n, penetration=pen))
    out.sort(key=lambda c: -c.penetration)
    return out[:MAX_MANIFOLD_POINTS]


def _closest_point_on_face(p: Vec3, verts: Sequence[Vec3], loop, normal: Vec3) -> Vec3:
    """Closest point to p on a convex polygon face (project, then clamp to edges)."""
    a = verts[loop[0]]
    proj = vsub(p, vscale(normal, vdot(normal, vsub(p, a))))
    inside = True
    for i in range(len(loop)):
        e0, e1 = verts[loop[i]], verts[loop[(i + 1) % len(loop)]]
        edge = vsub(e1, e0)
        if vdot(vcross(edge, vsub(proj, e0)), normal) < 0:
            inside = False
            break
    if inside:
        return proj
    best, best_d = None, math.inf
    for i in range(len(loop)):
        e0, e1 = verts[loop[i]], verts[loop[(i + 1) % len(loop)]]
        edge = vsub(e1, e0)
        denom = vdot(edge, edge)
        t = 0.0 if denom < 1e-24 else max(0.0, min(1.0, vdot(vsub(p, e0), edge) / denom))
        cand = vadd(e0, vscale(edge, t))
        d = vnorm(vsub(p, cand))
        if d < best_d:
            best, best_d = cand, d
    return best


def collide_sphere_polytope(
    sphere_pos: Vec3, radius: float, poly: Polytope, pos: Vec3, quat,
    sphere_is_a: bool,
) -> List[ContactPoint]:
    """Sphere vs convex solid via the closest surface point."""
    local = qrotate_inv(quat, vsub(sphere_pos, pos))
    verts = poly.vertices
    max_sep = -math.inf
    best_face = 0
    for fi, loop in enumerate(poly.faces):
        sep = vdot(poly.normals[fi], vsub(local, verts[loop[0]]))
        if sep > max_sep:
            max_sep = sep
            best_face = fi
    if max_sep > radius:
        return []
    if max_sep <= 0.0:
        # center inside: push out along the least-penetrating face
        n_local = poly.normals[best_face]
        pen = radius - max_sep
        surface_local = vsub(local, vscale(n_local, max_sep))
    else:
        closest = _closest_point_on_face(local, verts, poly.faces[best_face],
                                         poly.normals[best_face])
        delta = vsub(local, closest)
        dist = vnorm(delta)
        if dist > radius or dist < 1e-12:
            if dist > radius:
                return []
            delta = poly.normals[best_face]
            dist = 1.0
        n_local = vscale(delta, 1.0 / dist)
        pen = radius - vdot(n_local, vsub(local, closest))
        surface_local = closest
    n_world = qrotate(quat, n_local)  # points from solid toward sphere center
    point = vadd(qrotate(quat, surface_local), pos)
    if sphere_is_a:
        return [ContactPoint(point=point, normal=vscale(n_world, -1.0), penetration=pen)]
    return [ContactPoint(point=point, normal=n_world, penetration=pen)]


def _face_separation(
    poly_a: Polytope, verts_a_w, normals_a_w, verts_b_w
) -> Tuple[float, int]:
    """Max separation of B from A's faces (negative when overlapping)."""
    best_sep, best_face = -math.inf, 0
    for fi, n in enumerate(normals_a_w):
        face_v = verts_a_w[poly_a.faces[fi][0]]
        m = min(vdot(n, w) for w in verts_b_w)
        sep = m - vdot(n, face_v)
        if sep > best_sep:
            best_sep, best_face = sep, fi
    return best_sep, best_face


def _segment_closest_points(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> Tuple[Vec3, Vec3]:
    d1, d2 = vsub(q1, p1), vsub(q2, p2)
    r = vsub(p1, p2)
    a, e, f = vdot(d1, d1), vdot(d2, d2), vdot(d2, r)
    c = vdot(d1, r)
    b = vdot(d1, d2)
    denom = a * e - b * b
    s = max(0.0, min(1.0, (b * f - c * e) / denom)) if abs(denom) > 1e-18 else 0.0
    t = (b * s + f) / e if e > 1e-18 else 0.0
    t = max(0.0, min(1.0, t))
    s = max(0.0, min(1.0, (b * t - c) / a)) if a > 1e-18 else 0.0
    return vadd(p1, vscale(d1, s)), vadd(p2, vscale(d2, t))


def _clip_polygon_by_plane(points: List[Vec3], n: Vec3, d: float) -> List[Vec3]:
    """Keep the part of the polygon with dot(n, p) <= d (Sutherland-Hodgman)."""
    out: List[Vec3] = []
    for i in range(len(points)):
        cur, nxt = points[i], points[(i + 1) % len(points)]
        dc, dn = vdot(n, cur) - d, vdot(n, nxt) - d
        if dc <= 0:
            out.append(cur)
        if (dc < 0 < dn) or (dn < 0 < dc):
            t = dc / (dc - dn)
            out.append(vadd(cur, vscale(vsub(nxt, cur), t)))
    return out


def collide_polytope_polytope(
    poly_a: Polytope, pos_a: Vec3, quat_a,
    poly_b: Polytope, pos_b: Vec3, quat_b,
) -> List[ContactPoint]:
    """SAT over face and edge-pair axes, manifold by reference-face clipping."""
    verts_a = world_vertices(poly_a, pos_a, quat_a)
    verts_b = world_vertices(poly_b, pos_b, quat_b)
    normals_a = [qrotate(quat_a, n) for n in poly_a.normals]
    normals_b = [qrotate(quat_b, n) for n in poly_b.normals]

    sep_a, face_a = _face_separation(poly_a, verts_a, normals_a, verts_b)
    if sep_a > 0:
        return []
    sep_b, face_b = _face_separation(poly_b, verts_b, normals_b, verts_a)
    if sep_b > 0:
        return []

    # edge-pair axes
    centroid_delta = vsub(pos_b, pos_a)
    edges_a = [qrotate(quat_a, e) for e in poly_a.edge_dirs]
    edges_b = [qrotate(quat_b, e) for e in poly_b.edge_dirs]
    sep_e, axis_e = -math.inf, None
    for ea in edges_a:
        for eb in edges_b:
            axis = vcross(ea, eb)
            ln = vnorm(axis)
            if ln < PARALLEL_EDGE_EPS:
                continue
            axis = vscale(axis, 1.0 / ln)
            if vdot(axis, centroid_delta) < 0:
                axis = vscale(axis, -1.0)
            max_a = max(vdot(axis, v) for v in verts_a)
            min_b = min(vdot(axis, v) for v in verts_b)
            sep = min_b - max_a
            if sep > 0:
                return []
            if sep > sep_e:
                sep_e, axis_e = sep, axis

    use_face_a = sep_a >= sep_b - FACE_PREFERENCE_EPS
    face_sep = sep_a if use_face_a else sep_b
    if axis_e is not None and sep_e > face_sep + FACE_PREFERENCE_EPS:
        # edge-edge contact: closest points between the two supporting edges
        pa_pts = _supporting_edge(poly_a, verts_a, axis_e)
        pb_pts = _supporting_edge(poly_b, verts_b, vscale(axis_e, -1.0))
        ca, cb = _segment_closest_points(*pa_pts, *pb_pts)
        mid = vscale(vadd(ca, cb), 0.5)
        return [ContactPoint(point=mid, normal=axis_e, penetration=-sep_e)]

    if use_face_a:
        return _clip_face_contact(poly_a, verts_a, normals_a, face_a,
                                  poly_b, verts_b, normals_b, flip=False)
    return _clip_face_contact(poly_b, verts_b, normals_b, face_b,
                              poly_a, verts_a, normals_a, flip=True)


def _supporting_edge(poly: Polytope, verts_w, direction: Vec3):
    """The polytope edge most extreme along `direction`."""
    best, best_dot = None, -math.inf
    for loop in poly.faces:
        for i in range(len(loop)):
            a, b = loop[i], loop[(i + 1) % len(loop)]
            mid = vscale(vadd(verts_w[a], verts_w[b]), 0.5)
            d = vdot(mid, direction)
            if d > best_dot:
                best_dot, best = d, (verts_w[a], verts_w[b])
    return best


def _clip_face_contact(
    poly_ref: Polytope, verts_ref, normals_ref, ref_face: int,
    poly_inc: Polytope, verts_inc, normals_inc, flip: bool,
) -> List[ContactPoint]:
    n_ref = normals_ref[ref_face]
    # incident face: most anti-parallel to the reference normal
    inc_face = min(range(len(poly_inc.faces)), key=lambda fi: vdot(normals_inc[fi], n_ref))
    points = [verts_inc[i] for i in poly_inc.faces[inc_face]]

    ref_loop = poly_ref.faces[ref_face]
    for i in range(len(ref_loop)):
        e0 = verts_ref[ref_loop[i]]
        e1 = verts_ref[ref_loop[(i + 1) % len(ref_loop)]]
        side_n = vnormalize(vcross(vsub(e1, e0), n_ref))  # points out of the face
        points = _clip_polygon_by_plane(points, side_n, vdot(side_n, e0))
        if not points:
            return []

    ref_v = verts_ref[ref_loop[0]]
    normal = vscale(n_ref, -1.0) if flip else n_ref  # always from A toward B
    out = []
    for p in points:
        sep = vdot(n_ref, vsub(p, ref_v))
        if sep <= 0:
            out.append(ContactPoint(point=p, normal=normal, penetration=-sep))
    out.sort(key=lambda c: -c.penetration)
    return out[:MAX_MANIFOLD_POINTS]
