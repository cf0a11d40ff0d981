"""Scene documents: the JSON bridge between segmentation, simulation,
script emission, and prior rendering.

A scene document lists bodies (shape, material profile, initial pose,
injected velocity, cloth pins) plus the environment; it is what the CLI
writes to disk, what builds a World, and what the emitter renders.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence, Tuple

from .emitter import SceneObjectSpec, SceneSpec
from .errors import MalformedRecord, UnsupportedShape
from .materials import MassEstimate, MaterialProfile
from .physics import Cloth, World, make_box_body, make_prism_body, make_sphere_body
from .physics.shapes import BoxShape, PrismShape, SphereShape
from .sketch import MeshPrimitive

#: outline drawn in the canvas xy-plane stands upright: canvas x -> world x,
#: canvas y -> world z (height), extrusion along world y (depth).
UPRIGHT_QUAT = (math.sqrt(0.5), math.sqrt(0.5), 0.0, 0.0)

DEFAULT_CLOTH_GRID = 5


@dataclass
class SceneBody:
    id: str
    kind: str  # sphere | box | prism | cloth
    shape: dict  # kind-specific parameters
    profile: MaterialProfile
    mass_kg: float
    volume_m3: float
    provenance: str
    position: Tuple[float, float, float]
    orientation: Tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    pinned: tuple = ()


@dataclass
class SceneDocument:
    bodies: List[SceneBody]
    gravity: Tuple[float, float, float] = (0.0, 0.0, -9.81)
    dt: float = 1.0 / 240.0
    duration: float = 2.0
    solver_iterations: int = 8
    ground_plane: bool = True
    ground_friction: float = 0.8
    metadata: dict = field(default_factory=dict)

    @property
    def frame_count(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9))


def scene_to_json(doc: SceneDocument) -> str:
    payload = {
        "environment": {
            "gravity": list(doc.gravity),
            "dt": doc.dt,
            "duration": doc.duration,
            "solver_iterations": doc.solver_iterations,
            "ground_plane": doc.ground_plane,
            "ground_friction": doc.ground_friction,
        },
        "bodies": [
            {
                "id": b.id,
                "kind": b.kind,
                "shape": b.shape,
                "profile": asdict(b.profile),
                "mass_kg": b.mass_kg,
                "volume_m3": b.volume_m3,
                "provenance": b.provenance,
                "position": list(b.position),
                "orientation": list(b.orientation),
                "velocity": list(b.velocity),
                "pinned": [list(p) for p in b.pinned],
            }
            for b in doc.bodies
        ],
        "metadata": doc.metadata,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def scene_from_json(text: str) -> SceneDocument:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"scene is not valid JSON: {exc}") from exc
    env = payload.get("environment", {})
    bodies = []
    for rec in payload.get("bodies", []):
        try:
            bodies.append(
                SceneBody(
                    id=rec["id"],
                    kind=rec["kind"],
                    shape=rec["shape"],
                    profile=MaterialProfile(**rec["profile"]),
                    mass_kg=float(rec["mass_kg"]),
                    volume_m3=float(rec["volume_m3"]),
                    provenance=rec.get("provenance", "rule_based"),
                    position=tuple(rec["position"]),
                    orientation=tuple(rec.get("orientation", (1.0, 0.0, 0.0, 0.0))),
                    velocity=tuple(rec.get("velocity", (0.0, 0.0, 0.0))),
                    pinned=tuple(tuple(p) for p in rec.get("pinned", [])),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad scene body record: {exc}") from exc
    return SceneDocument(
        bodies=bodies,
        gravity=tuple(env.get("gravity", (0.0, 0.0, -9.81))),
        dt=float(env.get("dt", 1.0 / 240.0)),
        duration=float(env.get("duration", 2.0)),
        solver_iterations=int(env.get("solver_iterations", 8)),
        ground_plane=bool(env.get("ground_plane", True)),
        ground_friction=float(env.get("ground_friction", 0.8)),
        metadata=payload.get("metadata", {}),
    )


def body_from_primitive(
    object_id: str,
    primitive: MeshPrimitive,
    profile: MaterialProfile,
    mass: MassEstimate,
    centroid_xy: Tuple[float, float],
    bbox_wh: Tuple[float, float],
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0),
    pinned: Sequence[Tuple[int, int]] = (),
) -> SceneBody:
    """Place a lifted sketch object in the world (canvas y becomes height)."""
    cx, cy = centroid_xy
    if profile.label == "cloth":
        return SceneBody(
            id=object_id,
            kind="cloth",
            shape={
                "rows": DEFAULT_CLOTH_GRID,
                "cols": DEFAULT_CLOTH_GRID,
                "width": bbox_wh[0],
                "height": bbox_wh[1],
                "thickness": 0.005,
            },
            profile=profile,
            mass_kg=mass.mass_kg,
            volume_m3=mass.volume_m3,
            provenance=mass.provenance,
            position=(cx, 0.0, cy),
            velocity=velocity,
            pinned=tuple(pinned) or ((0, 0), (0, DEFAULT_CLOTH_GRID - 1)),
        )
    if primitive.kind == "sphere":
        kind, shape = "sphere", {"radius": primitive.radius}
        orientation = (1.0, 0.0, 0.0, 0.0)
    elif primitive.kind == "box":
        hx, hy, hz = primitive.half_extents
        # canvas (w, h) outline extruded by thickness: depth goes into world y
        kind, shape = "box", {"half_extents": [hx, hz, hy]}
        orientation = (1.0, 0.0, 0.0, 0.0)
    elif primitive.kind == "extruded_prism":
        # ring order comes from the bottom face of the lifted prism
        n = len(primitive.vertices) // 2
        ring = [(v[0], v[1]) for v in primitive.vertices[:n]]
        thickness = primitive.vertices[n][2] - primitive.vertices[0][2]
        kind, shape = "prism", {"outline": [list(p) for p in ring], "thickness": thickness}
        orientation = UPRIGHT_QUAT
    else:
        raise UnsupportedShape(f"unknown primitive kind {primitive.kind!r}")
    return SceneBody(
        id=object_id,
        kind=kind,
        shape=shape,
        profile=profile,
        mass_kg=mass.mass_kg,
        volume_m3=mass.volume_m3,
        provenance=mass.provenance,
        position=(cx, 0.0, cy),
        orientation=orientation,
        velocity=velocity,
    )


def build_world(doc: SceneDocument) -> World:
    """Instantiate the simulation world; bodies keep document order."""
    world = World(
        gravity=doc.gravity,
        dt=doc.dt,
        solver_iterations=doc.solver_iterations,
    )
    if doc.ground_plane:
        world.add_ground_plane(friction_mu=doc.ground_friction)
    for b in doc.bodies:
        common = dict(
            position=b.position,
            orientation=b.orientation,
            linear_velocity=b.velocity,
            friction_mu=b.profile.friction_mu,
            restitution_e=b.profile.restitution_e,
        )
        if b.kind == "sphere":
            world.bodies.append(
                make_sphere_body(b.id, b.shape["radius"], b.mass_kg, **common))
        elif b.kind == "box":
            world.bodies.append(
                make_box_body(b.id, tuple(b.shape["half_extents"]), b.mass_kg, **common))
        elif b.kind == "prism":
            outline = [tuple(p) for p in b.shape["outline"]]
            world.bodies.append(
                make_prism_body(b.id, outline, b.shape["thickness"], b.mass_kg, **common))
        elif b.kind == "cloth":
            width = b.shape["width"]
            height = b.shape["height"]
            cloth = Cloth.make_grid(
                b.id,
                rows=int(b.shape.get("rows", DEFAULT_CLOTH_GRID)),
                cols=int(b.shape.get("cols", DEFAULT_CLOTH_GRID)),
                width=width,
                height=height,
                origin=(b.position[0] - width / 2.0, b.position[1], b.position[2] + height / 2.0),
                plane="xz",
                density_rho=b.profile.density_rho,
                thickness=float(b.shape.get("thickness", 0.005)),
                friction_mu=b.profile.friction_mu,
                pinned=[tuple(p) for p in b.pinned],
            )
            world.cloths.append(cloth)
        else:
            raise UnsupportedShape(f"unknown body kind {b.kind!r}")
    return world


def collision_shapes(doc: SceneDocument) -> Dict[str, object]:
    """Shapes by body id, as the prior renderer wants them."""
    shapes = {}
    for b in doc.bodies:
        if b.kind == "sphere":
            shapes[b.id] = SphereShape(b.shape["radius"])
        elif b.kind == "box":
            shapes[b.id] = BoxShape.create(tuple(b.shape["half_extents"]))
        elif b.kind == "prism":
            shapes[b.id] = PrismShape.create(
                [tuple(p) for p in b.shape["outline"]], b.shape["thickness"])
        # cloth renders via node positions, not an analytic shape
    return shapes


def scene_to_spec(doc: SceneDocument) -> SceneSpec:
    """Convert the simulation document into the emitter's input."""
    objects = []
    for b in doc.bodies:
        if b.kind == "sphere":
            primitive = MeshPrimitive(kind="sphere", radius=b.shape["radius"],
                                      volume=b.volume_m3)
        elif b.kind == "box":
            primitive = MeshPrimitive(kind="box",
                                      half_extents=tuple(b.shape["half_extents"]),
                                      volume=b.volume_m3)
        elif b.kind == "prism":
            ps = PrismShape.create([tuple(p) for p in b.shape["outline"]],
                                   b.shape["thickness"])
            primitive = MeshPrimitive(
                kind="extruded_prism",
                vertices=ps.poly.vertices,
                faces=tuple(tuple(f) for f in ps.poly.faces),
                volume=b.volume_m3,
            )
        elif b.kind == "cloth":
            w, h = b.shape["width"], b.shape["height"]
            primitive = MeshPrimitive(
                kind="box",
                half_extents=(w / 2.0, h / 2.0, b.shape.get("thickness", 0.005) / 2.0),
                volume=b.volume_m3,
            )
        else:
            raise UnsupportedShape(b.kind)
        objects.append(
            SceneObjectSpec(
                id=b.id,
                primitive=primitive,
                profile=b.profile,
                mass=MassEstimate(mass_kg=b.mass_kg, volume_m3=b.volume_m3,
                                  provenance=b.provenance),
                position=b.position,
                orientation=b.orientation,
                v_obj=b.velocity,
                pinned=b.pinned,
            )
        )
    return SceneSpec(
        objects=tuple(objects),
        gravity=doc.gravity,
        ground_plane=doc.ground_plane,
        frame_rate=int(round(1.0 / doc.dt)),
        frame_count=doc.frame_count,
        input_hashes=dict(doc.metadata.get("input_hashes", {})),
    )


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]
