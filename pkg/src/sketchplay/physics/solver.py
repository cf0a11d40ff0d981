"""Sequential-impulse contact solver with Coulomb friction and restitution.

Normal impulses accumulate with clamping to stay non-negative; friction
uses a 4-sided pyramid (two orthogonal tangents clamped independently by
mu times the accumulated normal impulse).  The restitution target uses
the approach speed measured before this step's force integration,
clamped by the current approach speed, which keeps bounce heights
accurate at discrete timesteps without ever injecting energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..geometry import Vec3, qrotate, qrotate_inv, vadd, vcross, vdot, vnormalize, vscale, vsub
from .shapes import mat3_invert

#: approach speeds below this bounce with e = 0 (keeps resting contacts quiet)
RESTITUTION_SPEED_THRESHOLD = 0.05


def _inv_inertia_apply(body, L: Vec3) -> Vec3:
    """World-space I^-1 * L via the body-frame inverse inertia."""
    local = qrotate_inv(body.orientation, L)
    m = body.inv_inertia_body
    rotated = (
        m[0][0] * local[0] + m[0][1] * local[1] + m[0][2] * local[2],
        m[1][0] * local[0] + m[1][1] * local[1] + m[1][2] * local[2],
        m[2][0] * local[0] + m[2][1] * local[1] + m[2][2] * local[2],
    )
    return qrotate(body.orientation, rotated)


def _velocity_at(body, r: Vec3) -> Vec3:
    if body is None:
        return (0.0, 0.0, 0.0)
    return vadd(body.linear_velocity, vcross(body.angular_velocity, r))


def _prev_velocity_at(body, r: Vec3) -> Vec3:
    if body is None:
        return (0.0, 0.0, 0.0)
    return vadd(body.prev_linear_velocity, vcross(body.prev_angular_velocity, r))


def _tangent_basis(n: Vec3):
    a = (1.0, 0.0, 0.0) if abs(n[0]) < 0.57735 else (0.0, 1.0, 0.0)
    t1 = vnormalize(vcross(n, a))
    t2 = vcross(n, t1)
    return t1, t2


@dataclass
class ContactConstraint:
    body_a: object
    body_b: Optional[object]  # None for static colliders
    point: Vec3
    normal: Vec3  # from A toward B
    penetration: float
    friction_mu: float
    restitution_e: float
    r_a: Vec3 = field(init=False)
    r_b: Vec3 = field(init=False)
    t1: Vec3 = field(init=False)
    t2: Vec3 = field(init=False)
    mass_n: float = field(init=False)
    mass_t1: float = field(init=False)
    mass_t2: float = field(init=False)
    bias: float = field(init=False, default=0.0)
    lambda_n: float = 0.0
    lambda_t1: float = 0.0
    lambda_t2: float = 0.0

    def __post_init__(self):
        a, b = self.body_a, self.body_b
        n = self.normal
        self.r_a = vsub(self.point, a.position)
        self.r_b = vsub(self.point, b.position) if b is not None else (0.0, 0.0, 0.0)
        self.t1, self.t2 = _tangent_basis(n)

        def effective_mass(axis: Vec3) -> float:
            k = a.inv_mass
            ra_x = vcross(self.r_a, axis)
            k += vdot(axis, vcross(_inv_inertia_apply(a, ra_x), self.r_a))
            if b is not None:
                rb_x = vcross(self.r_b, axis)
                k += b.inv_mass
                k += vdot(axis, vcross(_inv_inertia_apply(b, rb_x), self.r_b))
            return 1.0 / k if k > 1e-12 else 0.0

        self.mass_n = effective_mass(n)
        self.mass_t1 = effective_mass(self.t1)
        self.mass_t2 = effective_mass(self.t2)

        rel_now = vsub(_velocity_at(b, self.r_b), _velocity_at(a, self.r_a))
        rel_pre = vsub(_prev_velocity_at(b, self.r_b), _prev_velocity_at(a, self.r_a))
        approach_now = -vdot(rel_now, n)
        approach_pre = -vdot(rel_pre, n)
        if approach_now > RESTITUTION_SPEED_THRESHOLD:
            self.bias = self.restitution_e * max(0.0, min(approach_now, approach_pre))

    def _apply(self, impulse: Vec3) -> None:
        a, b = self.body_a, self.body_b
        a.linear_velocity = vsub(a.linear_velocity, vscale(impulse, a.inv_mass))
        a.angular_velocity = vsub(
            a.angular_velocity, _inv_inertia_apply(a, vcross(self.r_a, impulse))
        )
        if b is not None:
            b.linear_velocity = vadd(b.linear_velocity, vscale(impulse, b.inv_mass))
            b.angular_velocity = vadd(
                b.angular_velocity, _inv_inertia_apply(b, vcross(self.r_b, impulse))
            )

    def warm_start(self, lambda_n: float, lambda_t1: float, lambda_t2: float) -> None:
        """Pre-apply last step's accumulated impulses for this contact.

        Gauss-Seidel alone needs many sweeps to support a stack; starting
        from the previous solution makes the per-step correction small.
        """
        self.lambda_n = lambda_n
        self.lambda_t1 = lambda_t1
        self.lambda_t2 = lambda_t2
        impulse = vadd(
            vscale(self.normal, lambda_n),
            vadd(vscale(self.t1, lambda_t1), vscale(self.t2, lambda_t2)),
        )
        self._apply(impulse)

    def solve_normal(self) -> None:
        rel = vsub(_velocity_at(self.body_b, self.r_b), _velocity_at(self.body_a, self.r_a))
        v_n = vdot(rel, self.normal)
        d_lambda = -(v_n - self.bias) * self.mass_n
        new_lambda = max(self.lambda_n + d_lambda, 0.0)
        d = new_lambda - self.lambda_n
        self.lambda_n = new_lambda
        if d != 0.0:
            self._apply(vscale(self.normal, d))

    def solve_friction(self) -> None:
        limit = self.friction_mu * self.lambda_n
        if limit <= 0.0:
            return
        for tangent, attr in ((self.t1, "lambda_t1"), (self.t2, "lambda_t2")):
            rel = vsub(
                _velocity_at(self.body_b, self.r_b), _velocity_at(self.body_a, self.r_a)
            )
            v_t = vdot(rel, tangent)
            mass = self.mass_t1 if attr == "lambda_t1" else self.mass_t2
            d_lambda = -v_t * mass
            old = getattr(self, attr)
            new = max(-limit, min(limit, old + d_lambda))
            setattr(self, attr, new)
            d = new - old
            if d != 0.0:
                self._apply(vscale(tangent, d))


def solve_contacts(constraints, iterations: int) -> None:
    for _ in range(iterations):
        for c in constraints:
            c.solve_normal()
        for c in constraints:
            c.solve_friction()


def make_inv_inertia(inertia_body) -> tuple:
    return mat3_invert(inertia_body)


def combine_friction(mu_a: float, mu_b: float) -> float:
    return math.sqrt(mu_a * mu_b)


def combine_restitution(e_a: float, e_b: float) -> float:
    return max(e_a, e_b)
