"""Fixed-timestep world stepping: semi-implicit Euler, sequential impulses,
positional penetration projection.

Stepping mutates the world in place and emits one Frame per step; the
whole pipeline is plain-float arithmetic in a fixed order, so identical
worlds produce bitwise-identical frame streams on one platform.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from ..errors import NumericalBlowup, ParameterOutOfRange, UnknownBody
from ..geometry import Vec3, qintegrate, vadd, vdot, visfinite, vnorm, vscale, vsub
from .bodies import Cloth, RigidBody, SoftBody
from .collision import (
    ContactPoint,
    StaticPlane,
    collide_polytope_plane,
    collide_polytope_polytope,
    collide_sphere_plane,
    collide_sphere_polytope,
    collide_sphere_sphere,
)
from .shapes import BoxShape, PrismShape, SphereShape
from .solver import ContactConstraint, combine_friction, combine_restitution, solve_contacts

DEFAULT_DT = 1.0 / 240.0
DEFAULT_SOLVER_ITERATIONS = 8
DEFAULT_GRAVITY: Vec3 = (0.0, 0.0, -9.81)
PENETRATION_SLOP = 1e-4   # m
PROJECTION_FACTOR = 0.2
BLOWUP_LIMIT = 1e6        # m


@dataclass(frozen=True)
class BodySnapshot:
    id: str
    position: Vec3
    orientation: Tuple[float, float, float, float]
    linear_velocity: Vec3
    angular_velocity: Vec3


@dataclass(frozen=True)
class ContactRecord:
    body_a: str
    body_b: str  # body id or "<static>"
    point: Vec3
    normal: Vec3
    impulse: float


@dataclass(frozen=True)
class Frame:
    index: int
    time: float
    bodies: tuple          # tuple[BodySnapshot, ...]
    contacts: tuple        # tuple[ContactRecord, ...]
    node_positions: dict   # network id -> list of Vec3 (soft bodies / cloth)


@dataclass
class World:
    gravity: Vec3 = DEFAULT_GRAVITY
    dt: float = DEFAULT_DT
    solver_iterations: int = DEFAULT_SOLVER_ITERATIONS
    bodies: List[RigidBody] = field(default_factory=list)
    soft_bodies: List[SoftBody] = field(default_factory=list)
    cloths: List[Cloth] = field(default_factory=list)
    planes: List[StaticPlane] = field(default_factory=list)
    rng_seed: int = 0  # reserved; the deterministic core never draws from it
    step_index: int = 0
    # accumulated impulses from the previous step, keyed by contact pair;
    # used to warm-start the solver (required for stable stacking)
    contact_cache: Dict[tuple, list] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.dt <= 1.0 / 60.0:
            raise ParameterOutOfRange(f"dt must be in (0, 1/60], got {self.dt}")
        if self.solver_iterations < 1:
            raise ParameterOutOfRange("solver_iterations must be >= 1")

    def body(self, body_id: str) -> RigidBody:
        for b in self.bodies:
            if b.id == body_id:
                return b
        raise UnknownBody(f"no rigid body with id {body_id!r}")

    def add_ground_plane(self, z: float = 0.0, friction_mu: float = 0.8,
                         restitution_e: float = 0.0) -> None:
        self.planes.append(StaticPlane(normal=(0.0, 0.0, 1.0), offset=z,
                                       friction_mu=friction_mu,
                                       restitution_e=restitution_e))

    def clone(self) -> "World":
        return copy.deepcopy(self)


def _poly_of(shape):
    if isinstance(shape, (BoxShape, PrismShape)):
        return shape.poly
    return None


def _narrowphase_pair(a: RigidBody, b: RigidBody) -> List[ContactPoint]:
    sa, sb = a.shape, b.shape
    if isinstance(sa, SphereShape) and isinstance(sb, SphereShape):
        return collide_sphere_sphere(a.position, sa.radius, b.position, sb.radius)
    if isinstance(sa, SphereShape):
        return collide_sphere_polytope(a.position, sa.radius, _poly_of(sb),
                                       b.position, b.orientation, sphere_is_a=True)
    if isinstance(sb, SphereShape):
        return collide_sphere_polytope(b.position, sb.radius, _poly_of(sa),
                                       a.position, a.orientation, sphere_is_a=False)
    return collide_polytope_polytope(_poly_of(sa), a.position, a.orientation,
                                     _poly_of(sb), b.position, b.orientation)


def _narrowphase_plane(body: RigidBody, plane: StaticPlane) -> List[ContactPoint]:
    s = body.shape
    if isinstance(s, SphereShape):
        return collide_sphere_plane(body.position, s.radius, plane)
    return collide_polytope_plane(_poly_of(s), body.position, body.orientation, plane)


def _broadphase_overlap(a: RigidBody, b: RigidBody) -> bool:
    reach = a.shape.bounding_radius() + b.shape.bounding_radius()
    return vnorm(vsub(b.position, a.position)) <= reach


def _detect_contacts(world: World):
    """All rigid-rigid and rigid-plane contacts, in deterministic order."""
    pair_contacts = []
    n = len(world.bodies)
    for i in range(n):
        a = world.bodies[i]
        for pi, plane in enumerate(world.planes):
            dist = plane.signed_distance(a.position)
            if dist > a.shape.bounding_radius():
                continue
            for cp in _narrowphase_plane(a, plane):
                pair_contacts.append((a, None, cp, plane, (a.id, f"<plane{pi}>")))
        for j in range(i + 1, n):
            b = world.bodies[j]
            if not _broadphase_overlap(a, b):
                continue
            for cp in _narrowphase_pair(a, b):
                pair_contacts.append((a, b, cp, None, (a.id, b.id)))
    return pair_contacts


def _network_plane_response(net, planes) -> None:
    """Project nodes out of static planes; inelastic normal + Coulomb-ish tangent."""
    for plane in planes:
        n = plane.normal
        pos = net.positions
        dist = pos @ n - plane.offset
        below = dist < 0.0
        if not below.any():
            continue
        pos[below] -= dist[below, None] * n
        vel = net.velocities[below]
        v_n = vel @ n
        closing = v_n < 0.0
        mu = combine_friction(net.friction_mu, plane.friction_mu)
        e = combine_restitution(net.restitution_e, plane.restitution_e)
        dv_n = -(1.0 + e) * v_n * closing
        vel = vel + dv_n[:, None] * n
        tangential = vel - (vel @ n)[:, None] * n
        t_speed = (tangential**2).sum(axis=1) ** 0.5
        drop = mu * dv_n
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = 1.0 - drop / t_speed
        scale[(t_speed < 1e-12) | (scale < 0.0)] = 0.0
        scale[~closing] = 1.0
        vel = (vel @ n)[:, None] * n + tangential * scale[:, None]
        net.velocities[below] = vel
        if len(net.pinned_idx):
            net.velocities[net.pinned_idx] = 0.0


def step(world: World) -> Frame:
    """Advance one dt; returns the emitted frame.  Raises NumericalBlowup."""
    dt = world.dt
    g = world.gravity

    for body in world.bodies:
        body.prev_linear_velocity = body.linear_velocity
        body.prev_angular_velocity = body.angular_velocity
        body.linear_velocity = vadd(body.linear_velocity, vscale(g, dt))

    for net in world.soft_bodies + world.cloths:
        net.integrate(g, dt)

    raw = _detect_contacts(world)
    constraints: List[ContactConstraint] = []
    keys: List[tuple] = []
    for a, b, cp, plane, key in raw:
        if plane is None:
            mu = combine_friction(a.friction_mu, b.friction_mu)
            e = combine_restitution(a.restitution_e, b.restitution_e)
        else:
            mu = combine_friction(a.friction_mu, plane.friction_mu)
            e = combine_restitution(a.restitution_e, plane.restitution_e)
        constraints.append(
            ContactConstraint(
                body_a=a, body_b=b, point=cp.point, normal=cp.normal,
                penetration=cp.penetration, friction_mu=mu, restitution_e=e,
            )
        )
        keys.append(key)
    if constraints:
        _warm_start(world, constraints, keys)
        solve_contacts(constraints, world.solver_iterations)
        _update_contact_cache(world, constraints, keys)
    else:
        world.contact_cache.clear()

    for body in world.bodies:
        body.position = vadd(body.position, vscale(body.linear_velocity, dt))
        body.orientation = qintegrate(body.orientation, body.angular_velocity, dt)

    _project_penetrations(world, constraints)

    for net in world.soft_bodies + world.cloths:
        _network_plane_response(net, world.planes)

    world.step_index += 1
    frame = _emit_frame(world, constraints)
    _check_blowup(world, frame.index)
    return frame


#: contacts within this distance of a cached one inherit its impulses
WARM_START_MATCH_DISTANCE = 2e-3


def _warm_start(world: World, constraints, keys) -> None:
    for c, key in zip(constraints, keys):
        cached = world.contact_cache.get(key)
        if not cached:
            continue
        best, best_d = None, WARM_START_MATCH_DISTANCE
        for point, ln, lt1, lt2 in cached:
            d = vnorm(vsub(point, c.point))
            if d < best_d:
                best, best_d = (ln, lt1, lt2), d
        if best is not None:
            c.warm_start(*best)


def _update_contact_cache(world: World, constraints, keys) -> None:
    cache: Dict[tuple, list] = {}
    for c, key in zip(constraints, keys):
        cache.setdefault(key, []).append((c.point, c.lambda_n, c.lambda_t1, c.lambda_t2))
    world.contact_cache = cache


def _project_penetrations(world: World, constraints) -> None:
    """Positional projection: re-detect pairs that touched, push apart linearly."""
    seen_pairs = []
    seen_plane_bodies = []
    for c in constraints:
        if c.body_b is None:
            if c.body_a not in seen_plane_bodies:
                seen_plane_bodies.append(c.body_a)
        else:
            key = (c.body_a, c.body_b)
            if key not in seen_pairs:
                seen_pairs.append(key)

    for a, b in seen_pairs:
        contacts = _narrowphase_pair(a, b)
        if not contacts:
            continue
        deepest = max(contacts, key=lambda cp: cp.penetration)
        correction = PROJECTION_FACTOR * max(deepest.penetration - PENETRATION_SLOP, 0.0)
        if correction <= 0:
            continue
        total = a.inv_mass + b.inv_mass
        move = vscale(deepest.normal, correction / total)
        a.position = vsub(a.position, vscale(move, a.inv_mass))
        b.position = vadd(b.position, vscale(move, b.inv_mass))

    for body in seen_plane_bodies:
        for plane in world.planes:
            contacts = _narrowphase_plane(body, plane)
            if not contacts:
                continue
            deepest = max(cp.penetration for cp in contacts)
            correction = PROJECTION_FACTOR * max(deepest - PENETRATION_SLOP, 0.0)
            if correction > 0:
                body.position = vadd(body.position, vscale(plane.normal, correction))


def _emit_frame(world: World, constraints) -> Frame:
    index = world.step_index
    snapshots = tuple(
        BodySnapshot(
            id=b.id,
            position=b.position,
            orientation=b.orientation,
            linear_velocity=b.linear_velocity,
            angular_velocity=b.angular_velocity,
        )
        for b in world.bodies
    )
    contacts = tuple(
        ContactRecord(
            body_a=c.body_a.id,
            body_b=c.body_b.id if c.body_b is not None else "<static>",
            point=c.point,
            normal=c.normal,
            impulse=c.lambda_n,
        )
        for c in constraints
    )
    nodes = {
        net.id: [tuple(p) for p in net.positions]
        for net in world.soft_bodies + world.cloths
    }
    return Frame(index=index, time=index * world.dt, bodies=snapshots,
                 contacts=contacts, node_positions=nodes)


def _check_blowup(world: World, frame_index: int) -> None:
    for b in world.bodies:
        if not visfinite(b.position) or vnorm(b.position) > BLOWUP_LIMIT:
            raise NumericalBlowup(
                f"body {b.id!r} diverged at frame {frame_index}", frame_index
            )
    for net in world.soft_bodies + world.cloths:
        if not np.isfinite(net.positions).all() or np.abs(net.positions).max() > BLOWUP_LIMIT:
            raise NumericalBlowup(
                f"network {net.id!r} diverged at frame {frame_index}", frame_index
            )


def simulate(world: World, duration: float) -> List[Frame]:
    """Run floor(duration / dt) steps; frames come back in order."""
    if duration <= 0:
        raise ParameterOutOfRange(f"duration must be positive, got {duration}")
    steps = int(math.floor(duration / world.dt + 1e-9))
    return [step(world) for _ in range(steps)]


def apply_gesture_impulse(world: World, body_id: str, v_obj: Vec3) -> World:
    """Inject the transferred gesture velocity into a body (velocity, not force)."""
    body = world.body(body_id)
    body.linear_velocity = v_obj
    body.prev_linear_velocity = v_obj
    return world


def tilt_angle(snapshot: BodySnapshot, axis: Vec3 = (0.0, 0.0, 1.0),
               local_up: Vec3 = (0.0, 0.0, 1.0)) -> float:
    """Angle in radians between a body axis (world-rotated) and a world axis.

    local_up picks which body-frame axis counts as "up": +z for boxes,
    +y for prisms lifted from a canvas outline (their local z is the
    extrusion depth).
    """
    from ..geometry import qrotate
    up = qrotate(snapshot.orientation, local_up)
    c = max(-1.0, min(1.0, vdot(up, axis)))
    return math.acos(c)
