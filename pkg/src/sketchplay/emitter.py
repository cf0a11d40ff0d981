"""Deterministic scene-script emission for Blender, plus a static validator.

The script carries three mandated sections in order (material assignment,
physical property setup, motion simulation), one block per object in
id-sorted order, and a trailing provenance comment with the input hashes.
Emission is a pure function of the SceneSpec: identical specs give
byte-identical scripts.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EmptySpec, UnsupportedShape
from .materials import MassEstimate, MaterialProfile
from .sketch import MeshPrimitive

GENERATOR_VERSION = "0.1.0"
BLENDER_API_LEVEL = "4.x"  # pinned: bpy calls below follow 4.x conventions

SECTION_HEADERS = (
    "# --- SECTION 1: MATERIAL ASSIGNMENT ---",
    "# --- SECTION 2: PHYSICAL PROPERTY SETUP ---",
    "# --- SECTION 3: MOTION SIMULATION ---",
)

MATERIAL_COLORS = {
    "metal": (0.55, 0.57, 0.6, 1.0),
    "wood": (0.42, 0.27, 0.14, 1.0),
    "rubber": (0.1, 0.1, 0.12, 1.0),
    "glass": (0.8, 0.9, 0.95, 1.0),
    "cloth": (0.7, 0.2, 0.25, 1.0),
    "unknown": (0.5, 0.5, 0.5, 1.0),
}


@dataclass(frozen=True)
class SceneObjectSpec:
    id: str
    primitive: MeshPrimitive
    profile: MaterialProfile
    mass: MassEstimate
    position: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    orientation: Tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    v_obj: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    pinned: tuple = ()  # cloth corner pins, (row, col) pairs


@dataclass(frozen=True)
class SceneSpec:
    objects: tuple  # tuple[SceneObjectSpec, ...]
    gravity: Tuple[float, float, float] = (0.0, 0.0, -9.81)
    ground_plane: bool = True
    frame_rate: int = 240
    frame_count: int = 240
    input_hashes: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise EmptySpec(f"object ids must be unique, got {ids}")
        if self.frame_count < 1:
            raise EmptySpec("frame_count must be >= 1")


@dataclass(frozen=True)
class SceneScript:
    text: str
    sections: Tuple[int, int, int]  # byte offsets of the three headers


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def _f(x: float) -> str:
    """Shortest float formatting that round-trips bit-exactly."""
    return repr(float(x))


def _vec(v: Sequence[float]) -> str:
    return "(" + ", ".join(_f(c) for c in v) + ")"


def _obj_var(obj_id: str) -> str:
    return "obj_" + re.sub(r"[^0-9a-zA-Z_]", "_", obj_id)


def _emit_mesh(lines: List[str], o: SceneObjectSpec) -> None:
    var = _obj_var(o.id)
    p = o.primitive
    if p.kind == "sphere":
        lines.append(
            f"bpy.ops.mesh.primitive_uv_sphere_add(radius={_f(p.radius)}, "
            f"location={_vec(o.position)})"
        )
        lines.append(f"{var} = bpy.context.object")
    elif p.kind == "box":
        lines.append(f"bpy.ops.mesh.primitive_cube_add(size=2.0, location={_vec(o.position)})")
        lines.append(f"{var} = bpy.context.object")
        lines.append(f"{var}.scale = {_vec(p.half_extents)}")
    elif p.kind == "extruded_prism":
        verts = ", ".join(_vec(v) for v in p.vertices)
        faces = ", ".join("(" + ", ".join(str(i) for i in f) + ")" for f in p.faces)
        lines.append(f"mesh_{var} = bpy.data.meshes.new({o.id!r})")
        lines.append(f"mesh_{var}.from_pydata([{verts}], [], [{faces}])")
        lines.append(f"mesh_{var}.update()")
        lines.append(f"{var} = bpy.data.objects.new({o.id!r}, mesh_{var})")
        lines.append(f"bpy.context.collection.objects.link({var})")
        lines.append(f"{var}.location = {_vec(o.position)}")
    else:
        raise UnsupportedShape(f"cannot emit primitive kind {p.kind!r}")
    lines.append(f"{var}.name = {o.id!r}")
    lines.append(f"{var}.rotation_mode = 'QUATERNION'")
    lines.append(f"{var}.rotation_quaternion = {_vec(o.orientation)}")


def emit_script(spec: SceneSpec) -> SceneScript:
    """Render the SceneSpec as an executable Blender script."""
    objects = sorted(spec.objects, key=lambda o: o.id)
    lines: List[str] = []
    lines.append("# Scene script generated by sketchplay; executable via")
    lines.append("# blender --background --python <this file>")
    lines.append("import bpy")
    lines.append("")
    lines.append("scene = bpy.context.scene")
    lines.append("if scene.rigidbody_world is None:")
    lines.append("    bpy.ops.rigidbody.world_add()")
    if spec.ground_plane:
        lines.append("bpy.ops.mesh.primitive_plane_add(size=100.0, location=(0.0, 0.0, 0.0))")
        lines.append("ground = bpy.context.object")
        lines.append("ground.name = 'ground'")
        lines.append("bpy.ops.rigidbody.object_add()")
        lines.append("ground.rigid_body.type = 'PASSIVE'")
        lines.append("ground.rigid_body.friction = 0.8")
        lines.append("ground.rigid_body.restitution = 0.0")
    lines.append("")

    offsets = [0, 0, 0]

    # section 1: meshes + material binding
    offsets[0] = _byte_offset(lines)
    lines.append(SECTION_HEADERS[0])
    for o in objects:
        var = _obj_var(o.id)
        lines.append(f"# object: {o.id}")
        _emit_mesh(lines, o)
        color = MATERIAL_COLORS[o.profile.label]
        lines.append(f"mat_{var} = bpy.data.materials.new(name={('mat_' + o.id)!r})")
        lines.append(f"mat_{var}.diffuse_color = {_vec(color)}")
        lines.append(f"{var}.data.materials.append(mat_{var})")
    lines.append("")

    # section 2: physical properties
    offsets[1] = _byte_offset(lines)
    lines.append(SECTION_HEADERS[1])
    for o in objects:
        var = _obj_var(o.id)
        lines.append(f"# object: {o.id}")
        if o.profile.label == "cloth":
            lines.append(f"bpy.context.view_layer.objects.active = {var}")
            lines.append(f"cloth_{var} = {var}.modifiers.new(name='Cloth', type='CLOTH')")
            # Blender's cloth mass is per vertex; the total object mass is
            # recorded here unchanged so the validator can recover it.
            lines.append(f"cloth_{var}.settings.mass = {_f(o.mass.mass_kg)}")
            lines.append(f"cloth_{var}.collision_settings.friction = {_f(o.profile.friction_mu)}")
            lines.append(f"# restitution_e = {_f(o.profile.restitution_e)}  (cloth solver has none)")
            lines.append(f"cloth_{var}.settings.tension_stiffness = {_f(o.profile.elastic_modulus_E / 1e5)}")
        else:
            lines.append(f"bpy.context.view_layer.objects.active = {var}")
            lines.append("bpy.ops.rigidbody.object_add()")
            lines.append(f"{var}.rigid_body.type = 'ACTIVE'")
            lines.append(f"{var}.rigid_body.mass = {_f(o.mass.mass_kg)}")
            lines.append(f"{var}.rigid_body.friction = {_f(o.profile.friction_mu)}")
            lines.append(f"{var}.rigid_body.restitution = {_f(o.profile.restitution_e)}")
            lines.append(f"{var}.rigid_body.collision_margin = 0.0001")
            shape = "'SPHERE'" if o.primitive.kind == "sphere" else (
                "'BOX'" if o.primitive.kind == "box" else "'CONVEX_HULL'")
            lines.append(f"{var}.rigid_body.collision_shape = {shape}")
    lines.append("")

    # section 3: gravity, frame range, initial velocities at frame 1
    offsets[2] = _byte_offset(lines)
    lines.append(SECTION_HEADERS[2])
    lines.append(f"scene.gravity = {_vec(spec.gravity)}")
    lines.append("scene.frame_start = 1")
    lines.append(f"scene.frame_end = {spec.frame_count}")
    lines.append(f"scene.render.fps = {spec.frame_rate}")
    lines.append(f"scene.rigidbody_world.point_cache.frame_end = {spec.frame_count}")
    step = 1.0  # one frame of kinematic handoff carries the launch velocity
    for o in objects:
        var = _obj_var(o.id)
        lines.append(f"# object: {o.id}")
        if o.profile.label == "cloth":
            for r, c in o.pinned:
                lines.append(f"# pin cloth vertex (row={r}, col={c}) via a vertex group")
            lines.append(f"# initial velocity {_vec(o.v_obj)} recorded; cloth launches from rest")
            continue
        dx = tuple(o.position[i] + o.v_obj[i] * step / spec.frame_rate for i in range(3))
        lines.append(f"{var}.rigid_body.kinematic = True")
        lines.append(f"{var}.keyframe_insert(data_path='rigid_body.kinematic', frame=1)")
        lines.append(f"{var}.location = {_vec(o.position)}")
        lines.append(f"{var}.keyframe_insert(data_path='location', frame=1)")
        lines.append(f"{var}.location = {_vec(dx)}")
        lines.append(f"{var}.keyframe_insert(data_path='location', frame=2)")
        lines.append(f"{var}.rigid_body.kinematic = False")
        lines.append(f"{var}.keyframe_insert(data_path='rigid_body.kinematic', frame=3)")
    lines.append("")
    lines.append("# --- provenance ---")
    lines.append(f"# generator_version: {GENERATOR_VERSION}")
    lines.append(f"# blender_api_level: {BLENDER_API_LEVEL}")
    for key in sorted(spec.input_hashes):
        lines.append(f"# input_hash {key}: {spec.input_hashes[key]}")
    text = "\n".join(lines) + "\n"
    return SceneScript(text=text, sections=tuple(offsets))


def _byte_offset(lines: List[str]) -> int:
    return sum(len(line.encode("utf-8")) + 1 for line in lines)


# --- validation ------------------------------------------------------------

_OBJECT_MARK = re.compile(r"^# object: (.+)$")
_PROP_PATTERNS = {
    "mass": re.compile(r"\.(?:rigid_body|settings)\.mass = (.+)$"),
    "friction": re.compile(r"\.(?:rigid_body\.friction|collision_settings\.friction) = (.+)$"),
    "restitution": re.compile(r"(?:\.rigid_body\.restitution = |# restitution_e = )([^\s]+)"),
}


def _check_balanced(text: str) -> List[str]:
    """Bracket/quote balance over the script, ignoring comments and strings."""
    violations = []
    stack = []
    pairs = {")": "(", "]": "[", "}": "{"}
    i, n = 0, len(text)
    in_string: Optional[str] = None
    while i < n:
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == in_string:
                in_string = None
            elif ch == "\n":
                violations.append("unterminated string literal")
                in_string = None
        elif ch in "'\"":
            in_string = ch
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "([{":
            stack.append(ch)
        elif ch in ")]}":
            if not stack or stack.pop() != pairs[ch]:
                violations.append(f"unbalanced bracket {ch!r}")
        i += 1
    if in_string:
        violations.append("unterminated string literal at EOF")
    if stack:
        violations.append(f"{len(stack)} unclosed bracket(s)")
    return violations


def _section_object_ids(text: str) -> List[List[str]]:
    sections: List[List[str]] = []
    current: Optional[List[str]] = None
    for line in text.splitlines():
        if line in SECTION_HEADERS:
            current = []
            sections.append(current)
        elif current is not None:
            m = _OBJECT_MARK.match(line)
            if m:
                current.append(m.group(1))
    return sections


def validate_script(script: SceneScript, spec: Optional[SceneSpec] = None) -> ValidationReport:
    """Static checks: balance, section order, per-section object coverage."""
    text = script.text
    violations = _check_balanced(text)

    positions = [text.find(h) for h in SECTION_HEADERS]
    for header, pos in zip(SECTION_HEADERS, positions):
        if pos < 0:
            violations.append(f"missing section header: {header}")
        elif text.count(header) > 1:
            violations.append(f"duplicate section header: {header}")
    if all(p >= 0 for p in positions) and positions != sorted(positions):
        violations.append("section headers out of order")

    sections = _section_object_ids(text)
    if len(sections) == 3:
        expected = sorted(sections[0]) if spec is None else sorted(o.id for o in spec.objects)
        for idx, ids in enumerate(sections, start=1):
            for oid in expected:
                count = ids.count(oid)
                if count != 1:
                    violations.append(
                        f"object {oid!r} appears {count} times in section {idx}, expected 1"
                    )
            for oid in ids:
                if oid not in expected:
                    violations.append(f"unexpected object {oid!r} in section {idx}")
    return ValidationReport(violations=tuple(violations))


def request_remote_script(
    spec: SceneSpec,
    url: str,
    token: Optional[str] = None,
    timeout: float = 10.0,
) -> Tuple[Optional[SceneScript], ValidationReport]:
    """Pass-through mode: ask a remote generator for the script instead.

    The response is only run through validate_script (never compared to
    golden files); any transport failure returns (None, report).
    """
    import httpx

    payload = {
        "objects": [
            {
                "id": o.id,
                "kind": o.primitive.kind,
                "label": o.profile.label,
                "mass_kg": o.mass.mass_kg,
                "friction_mu": o.profile.friction_mu,
                "restitution_e": o.profile.restitution_e,
                "position": list(o.position),
                "v_obj": list(o.v_obj),
            }
            for o in sorted(spec.objects, key=lambda o: o.id)
        ],
        "gravity": list(spec.gravity),
        "frame_count": spec.frame_count,
    }
    headers = {"Authorization": f"Bearer {token}"} if token else {}
    try:
        response = httpx.post(url, json=payload, headers=headers, timeout=timeout)
        response.raise_for_status()
        text = response.text
    except Exception as exc:
        return None, ValidationReport(violations=(f"remote generator unavailable: {exc}",))
    script = SceneScript(text=text, sections=(0, 0, 0))
    return script, validate_script(script, spec)


def extract_properties(script: SceneScript) -> Dict[str, Dict[str, float]]:
    """Parse mass/friction/restitution per object back out of section 2."""
    text = script.text
    start = text.find(SECTION_HEADERS[1])
    end = text.find(SECTION_HEADERS[2])
    if start < 0 or end < 0:
        return {}
    out: Dict[str, Dict[str, float]] = {}
    current: Optional[str] = None
    for line in text[start:end].splitlines():
        m = _OBJECT_MARK.match(line)
        if m:
            current = m.group(1)
            out[current] = {}
            continue
        if current is None:
            continue
        for name, pattern in _PROP_PATTERNS.items():
            pm = pattern.search(line)
            if pm and name not in out[current]:
                out[current][name] = float(pm.group(1))
    return out
