"""Simulation bodies: rigid solids, spring-lattice soft bodies, grid cloth."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Set, Tuple

import numpy as np

from ..errors import ParameterOutOfRange
from ..geometry import IDENTITY_QUAT, Quat, Vec3, qnormalize
from .shapes import BoxShape, Mat3, PrismShape, SphereShape, mat3_invert


@dataclass
class RigidBody:
    id: str
    shape: object  # SphereShape | BoxShape | PrismShape
    position: Vec3
    orientation: Quat = IDENTITY_QUAT
    linear_velocity: Vec3 = (0.0, 0.0, 0.0)
    angular_velocity: Vec3 = (0.0, 0.0, 0.0)
    mass_kg: float = 1.0
    friction_mu: float = 0.5
    restitution_e: float = 0.3
    inertia_body: Mat3 = field(default=None)
    inv_mass: float = field(init=False)
    inv_inertia_body: Mat3 = field(init=False)
    # velocities at the start of the step, before force integration;
    # the solver's restitution target reads these
    prev_linear_velocity: Vec3 = field(init=False, default=(0.0, 0.0, 0.0))
    prev_angular_velocity: Vec3 = field(init=False, default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        if self.mass_kg <= 0:
            raise ParameterOutOfRange(f"mass must be positive, got {self.mass_kg}")
        if self.inertia_body is None:
            self.inertia_body = self.shape.inertia(self.mass_kg)
        self.orientation = qnormalize(self.orientation)
        self.inv_mass = 1.0 / self.mass_kg
        self.inv_inertia_body = mat3_invert(self.inertia_body)
        self.prev_linear_velocity = self.linear_velocity
        self.prev_angular_velocity = self.angular_velocity


def make_sphere_body(id: str, radius: float, mass_kg: float, position: Vec3, **kw) -> RigidBody:
    return RigidBody(id=id, shape=SphereShape(radius), mass_kg=mass_kg, position=position, **kw)


def make_box_body(id: str, half_extents: Vec3, mass_kg: float, position: Vec3, **kw) -> RigidBody:
    return RigidBody(id=id, shape=BoxShape.create(half_extents), mass_kg=mass_kg,
                     position=position, **kw)


def make_prism_body(id: str, outline, thickness: float, mass_kg: float,
                    position: Vec3, **kw) -> RigidBody:
    return RigidBody(id=id, shape=PrismShape.create(outline, thickness), mass_kg=mass_kg,
                     position=position, **kw)


def springs_from_elastic_moduli(
    E: float, nu: float, lattice_spacing: float, node_mass: float = 1.0
) -> dict:
    """First-order cubic-lattice mapping from continuum moduli to springs.

    Axial stiffness k = E * spacing, shear k * nu/(1-nu), and a light
    dashpot 0.1*sqrt(k*m).  A coarse approximation, not exact continuum
    elasticity -- adequate for the scale of sketch-born solids.
    """
    if E <= 0:
        raise ParameterOutOfRange(f"E must be positive, got {E}")
    if not 0 <= nu < 0.5:
        raise ParameterOutOfRange(f"nu must be in [0, 0.5), got {nu}")
    if lattice_spacing <= 0:
        raise ParameterOutOfRange(f"spacing must be positive, got {lattice_spacing}")
    if node_mass <= 0:
        raise ParameterOutOfRange(f"node_mass must be positive, got {node_mass}")
    k_structural = E * lattice_spacing
    k_shear = k_structural * nu / (1.0 - nu)
    damping = 0.1 * math.sqrt(k_structural * node_mass)
    return {"k_structural": k_structural, "k_shear": k_shear, "damping": damping}


class SpringNetwork:
    """Shared state layout for soft bodies and cloth: nodes plus springs."""

    def __init__(
        self,
        id: str,
        positions: np.ndarray,      # (N, 3)
        node_mass: np.ndarray,      # (N,)
        springs: np.ndarray,        # (S, 2) int indices
        stiffness: np.ndarray,      # (S,)
        damping: np.ndarray,        # (S,)
        pinned: Set[int],
        friction_mu: float = 0.5,
        restitution_e: float = 0.0,
        drag: float = 0.0,          # per-step velocity damping factor in [0, 1)
    ):
        if np.any(stiffness <= 0):
            raise ParameterOutOfRange("all spring stiffnesses must be positive")
        self.id = id
        self.positions = positions.astype(float)
        self.velocities = np.zeros_like(self.positions)
        self.node_mass = node_mass.astype(float)
        self.springs = springs.astype(int)
        self.stiffness = stiffness.astype(float)
        self.damping = damping.astype(float)
        self.rest_lengths = np.linalg.norm(
            self.positions[self.springs[:, 1]] - self.positions[self.springs[:, 0]], axis=1
        )
        self.pinned = set(pinned)
        self.pinned_idx = np.array(sorted(self.pinned), dtype=int)
        self.friction_mu = friction_mu
        self.restitution_e = restitution_e
        self.drag = drag
        if not self._connected():
            raise ParameterOutOfRange("spring graph must be connected")

    def _connected(self) -> bool:
        n = len(self.positions)
        adj = [[] for _ in range(n)]
        for i, j in self.springs:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == n

    def spring_forces(self) -> np.ndarray:
        i, j = self.springs[:, 0], self.springs[:, 1]
        delta = self.positions[j] - self.positions[i]
        length = np.linalg.norm(delta, axis=1)
        length = np.where(length < 1e-12, 1e-12, length)
        direction = delta / length[:, None]
        stretch = length - self.rest_lengths
        rel_v = np.einsum("ij,ij->i", self.velocities[j] - self.velocities[i], direction)
        magnitude = self.stiffness * stretch + self.damping * rel_v
        f = magnitude[:, None] * direction
        forces = np.zeros_like(self.positions)
        np.add.at(forces, i, f)
        np.add.at(forces, j, -f)
        return forces

    def integrate(self, gravity: Vec3, dt: float) -> None:
        forces = self.spring_forces()
        accel = forces / self.node_mass[:, None] + np.asarray(gravity)
        self.velocities += accel * dt
        if self.drag > 0:
            self.velocities *= 1.0 - self.drag
        if len(self.pinned_idx):
            self.velocities[self.pinned_idx] = 0.0
        self.positions += self.velocities * dt

    def strains(self) -> np.ndarray:
        i, j = self.springs[:, 0], self.springs[:, 1]
        length = np.linalg.norm(self.positions[j] - self.positions[i], axis=1)
        return np.abs(length - self.rest_lengths) / self.rest_lengths

    def max_speed(self) -> float:
        return float(np.linalg.norm(self.velocities, axis=1).max())


class SoftBody(SpringNetwork):
    """Cubic spring lattice filling a box, derived from elastic moduli."""

    @staticmethod
    def from_box(
        id: str,
        center: Vec3,
        size: Vec3,
        resolution: Tuple[int, int, int],
        density_rho: float,
        E: float,
        nu: float,
        drag: float = 0.005,
    ) -> "SoftBody":
        nx, ny, nz = (max(2, r) for r in resolution)
        xs = np.linspace(center[0] - size[0] / 2, center[0] + size[0] / 2, nx)
        ys = np.linspace(center[1] - size[1] / 2, center[1] + size[1] / 2, ny)
        zs = np.linspace(center[2] - size[2] / 2, center[2] + size[2] / 2, nz)
        idx = {}
        positions = []
        for a, x in enumerate(xs):
            for b, y in enumerate(ys):
                for c, z in enumerate(zs):
                    idx[(a, b, c)] = len(positions)
                    positions.append((x, y, z))
        positions = np.array(positions)
        volume = size[0] * size[1] * size[2]
        total_mass = density_rho * volume
        node_mass = np.full(len(positions), total_mass / len(positions))

        spacing = min(size[0] / (nx - 1), size[1] / (ny - 1), size[2] / (nz - 1))
        params = springs_from_elastic_moduli(E, nu, spacing, float(node_mass[0]))
        springs, ks, cs = [], [], []

        def add(i, j, k_value):
            springs.append((i, j))
            ks.append(k_value)
            cs.append(params["damping"])

        axial = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
        diagonal = ((1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1))
        shear_k = params["k_shear"] if params["k_shear"] > 0 else params["k_structural"] * 1e-6
        for (a, b, c), i in idx.items():
            for da, db, dc in axial:
                j = idx.get((a + da, b + db, c + dc))
                if j is not None:
                    add(i, j, params["k_structural"])
            for da, db, dc in diagonal:
                j = idx.get((a + da, b + db, c + dc))
                if j is not None:
                    add(i, j, shear_k)
        return SoftBody(
            id=id,
            positions=positions,
            node_mass=node_mass,
            springs=np.array(springs),
            stiffness=np.array(ks),
            damping=np.array(cs),
            pinned=set(),
            drag=drag,
        )


class Cloth(SpringNetwork):
    """Rectangular cloth grid with structural, shear, and bend springs."""

    def __init__(self, *args, rows: int, cols: int, thickness: float, **kw):
        super().__init__(*args, **kw)
        self.rows = rows
        self.cols = cols
        self.thickness = thickness

    @staticmethod
    def make_grid(
        id: str,
        rows: int,
        cols: int,
        width: float,
        height: float,
        origin: Vec3 = (0.0, 0.0, 0.0),
        plane: str = "xz",
        density_rho: float = 300.0,
        thickness: float = 0.005,
        # stiffness bounded by explicit-integration stability at dt=1/240:
        # sqrt(sum-of-spring-k / node_mass) * dt must stay well under 2
        k_structural: float = 200.0,
        k_shear: float = 50.0,
        k_bend: float = 10.0,
        damping: Optional[float] = None,
        drag: float = 0.02,
        friction_mu: float = 0.6,
        pinned: Sequence[Tuple[int, int]] = (),
        dt: float = 1.0 / 240.0,
    ) -> "Cloth":
        if rows < 2 or cols < 2:
            raise ParameterOutOfRange("cloth grid needs rows, cols >= 2")
        total_mass = density_rho * width * height * thickness
        n = rows * cols
        node_mass = np.full(n, total_mass / n)
        # clamp stiffness so light grids (small drawn cloths) stay inside
        # the explicit stability bound: sqrt(k_sum / m) * dt <= 1.2
        k_sum = 4.0 * (k_structural + k_shear + k_bend)
        k_limit = float(node_mass[0]) * (1.2 / dt) ** 2
        if k_sum > k_limit:
            shrink = k_limit / k_sum
            k_structural *= shrink
            k_shear *= shrink
            k_bend *= shrink
        if damping is None:
            damping = 0.1 * math.sqrt(k_structural * node_mass[0])

        def node(r, c):
            return r * cols + c

        positions = np.zeros((n, 3))
        for r in range(rows):
            for c in range(cols):
                u = width * c / (cols - 1)
                v = height * r / (rows - 1)
                if plane == "xz":  # hanging: x across, z down from origin
                    p = (origin[0] + u, origin[1], origin[2] - v)
                elif plane == "xy":  # flat: x across, y across, slight z = origin
                    p = (origin[0] + u, origin[1] + v, origin[2])
                else:
                    raise ParameterOutOfRange(f"unknown cloth plane {plane!r}")
                positions[node(r, c)] = p

        springs, ks, cs = [], [], []

        def add(i, j, k_value):
            springs.append((i, j))
            ks.append(k_value)
            cs.append(damping)

        for r in range(rows):
            for c in range(cols):
                i = node(r, c)
                if c + 1 < cols:
                    add(i, node(r, c + 1), k_structural)
                if r + 1 < rows:
                    add(i, node(r + 1, c), k_structural)
                if r + 1 < rows and c + 1 < cols:
                    add(i, node(r + 1, c + 1), k_shear)
                    add(node(r, c + 1), node(r + 1, c), k_shear)
                if c + 2 < cols:
                    add(i, node(r, c + 2), k_bend)
                if r + 2 < rows:
                    add(i, node(r + 2, c), k_bend)

        return Cloth(
            id,
            positions,
            node_mass,
            np.array(springs),
            np.array(ks),
            np.array(cs),
            {node(r, c) for r, c in pinned},
            friction_mu=friction_mu,
            restitution_e=0.0,
            drag=drag,
            rows=rows,
            cols=cols,
            thickness=thickness,
        )
