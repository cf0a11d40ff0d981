"""End-to-end pipeline: canvas + gestures in, scene/frames/script/priors out.

This is the one place the stages are wired together; the CLI and the
service both call into here so their outputs are byte-identical.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import materials, priors, sketch, trajectory
from .config import GestureBinding, PipelineConfig
from .emitter import emit_script, validate_script
from .errors import MalformedRecord, SketchPlayError, UnknownObject
from .geometry import Vec3
from .physics import apply_gesture_impulse, frame_log_bytes, simulate
from .physics.world import Frame
from .scene import (
    SceneDocument,
    body_from_primitive,
    build_world,
    collision_shapes,
    content_hash,
    scene_to_json,
    scene_to_spec,
)


@dataclass
class ObjectRecord:
    """A segmented object with everything inference attached to it."""

    obj: sketch.SketchObject
    primitive: sketch.MeshPrimitive
    profile: materials.MaterialProfile
    mass: materials.MassEstimate
    v_obj: Vec3 = (0.0, 0.0, 0.0)
    pinned: tuple = ()
    gesture_stroke: Optional[trajectory.Stroke] = None


def stroke_content(stroke: trajectory.Stroke) -> bytes:
    """Canonical byte form of a stroke, for provenance hashing."""
    import json

    return json.dumps([[p.t, *p.pos] for p in stroke.points]).encode("utf-8")


@dataclass
class PipelineResult:
    scene: SceneDocument
    frames: List[Frame]
    script_text: str
    prior_files: Dict[str, bytes]  # filename -> pgm payload
    frame_log: bytes


def analyze_canvas(canvas: sketch.SketchCanvas, cfg: PipelineConfig) -> List[ObjectRecord]:
    """Segment, lift, and infer properties for every drawn object."""
    strokes = canvas.strokes
    if cfg.beautify_epsilon > 0:
        strokes = tuple(sketch.beautify_stroke(s, cfg.beautify_epsilon) for s in strokes)
        canvas = sketch.SketchCanvas(strokes=strokes, extent=canvas.extent)
    objects = sketch.segment_objects(
        canvas, temporal_gap=cfg.temporal_gap, spatial_gap_fraction=cfg.spatial_gap_fraction
    )
    table = materials.load_material_table(cfg.material_table_path)
    prompt_by_index = dict(cfg.prompts)

    records = []
    for index, obj in enumerate(objects):
        prompt = prompt_by_index.get(index)
        if cfg.backend == "remote":
            inferred = materials.infer_material_remote(obj, prompt=prompt, table=table)
            profile, provenance = inferred.profile, inferred.provenance
            mass_override = inferred.mass_kg
        else:
            profile = materials.infer_material_rule_based(obj, prompt=prompt, table=table)
            provenance, mass_override = materials.PROVENANCE_RULE, None
        primitive = sketch.lift_to_3d(
            obj, thickness=cfg.thickness, fit_primitives=cfg.fit_primitives
        )
        mass = materials.estimate_mass(
            obj, primitive, profile, provenance=provenance, mass_override=mass_override
        )
        records.append(ObjectRecord(obj=obj, primitive=primitive, profile=profile, mass=mass))
    return records


def load_gesture_stroke(binding: GestureBinding) -> trajectory.Stroke:
    raw = Path(binding.path).read_bytes()
    text = raw.decode("utf-8")
    first_line = text.strip().splitlines()[0] if text.strip() else ""
    if '"points"' in first_line:
        frames = trajectory.ingest_keypoint_stream(raw)
        return trajectory.extract_fingertip_stroke(
            frames, binding.keypoint_index
            if binding.keypoint_index is not None
            else trajectory.DEFAULT_FINGERTIP_INDEX,
        )
    return trajectory.ingest_stroke_stream(raw)


def transfer_from_stroke(
    stroke: trajectory.Stroke,
    record: ObjectRecord,
    cfg: PipelineConfig,
    m_hand: Optional[float] = None,
    alpha: Optional[float] = None,
) -> Tuple[Vec3, dict]:
    """Gesture kinematics -> summary -> material-weighted velocity transfer."""
    samples = trajectory.estimate_kinematics(stroke)
    summary = trajectory.summarize_gesture(samples, release_window=cfg.release_window)
    m_hand = m_hand if m_hand is not None else cfg.m_hand
    alpha = alpha if alpha is not None else record.profile.alpha_material
    v_hand = summary.release_velocity
    v_obj = materials.transfer_velocity(
        materials.VelocityTransfer(
            v_hand=v_hand, m_hand=m_hand, m_obj=record.mass.mass_kg, alpha_material=alpha
        )
    )
    detail = {
        "v_hand": v_hand,
        "v_obj": v_obj,
        "m_hand": m_hand,
        "m_obj": record.mass.mass_kg,
        "alpha": alpha,
        "factor": materials.transfer_factor(m_hand, record.mass.mass_kg, alpha),
    }
    return v_obj, detail


def bind_gestures(records: List[ObjectRecord], cfg: PipelineConfig) -> None:
    for binding in cfg.bindings:
        record = _resolve_binding(records, binding)
        stroke = load_gesture_stroke(binding)
        # gesture strokes live in canvas coordinates: x stays x, y becomes
        # world z (height), nothing moves into the depth axis
        v_obj, _ = transfer_from_stroke(stroke, record, cfg,
                                        m_hand=binding.m_hand, alpha=binding.alpha)
        record.v_obj = (v_obj[0], v_obj[2], v_obj[1])
        record.gesture_stroke = stroke


def _resolve_binding(records: List[ObjectRecord], binding: GestureBinding) -> ObjectRecord:
    if binding.object_id is not None:
        for r in records:
            if r.obj.id == binding.object_id:
                return r
        raise UnknownObject(f"no object with id {binding.object_id!r}")
    idx = binding.object_index
    if idx is None or not 0 <= idx < len(records):
        raise UnknownObject(f"object index {idx} out of range (have {len(records)})")
    return records[idx]


def assemble_scene(
    records: List[ObjectRecord], cfg: PipelineConfig, input_hashes: Optional[dict] = None
) -> SceneDocument:
    bodies = [
        body_from_primitive(
            r.obj.id,
            r.primitive,
            r.profile,
            r.mass,
            centroid_xy=r.obj.centroid,
            bbox_wh=(r.obj.bbox[2] - r.obj.bbox[0], r.obj.bbox[3] - r.obj.bbox[1]),
            velocity=r.v_obj,
            pinned=r.pinned,
        )
        for r in records
    ]
    bodies.sort(key=lambda b: b.id)
    return SceneDocument(
        bodies=bodies,
        gravity=cfg.gravity,
        dt=cfg.dt,
        duration=cfg.duration,
        solver_iterations=cfg.solver_iterations,
        metadata={"generator_version": "0.1.0", "input_hashes": input_hashes or {}},
    )


def render_priors(
    doc: SceneDocument, frames: List[Frame], cfg: PipelineConfig
) -> Dict[str, bytes]:
    shapes = collision_shapes(doc)
    camera = priors.frame_scene_camera(
        frames, shapes, width=cfg.priors.width, height=cfg.priors.height
    )
    world_planes = build_world(doc).planes if doc.ground_plane else []
    files: Dict[str, bytes] = {}
    for frame in frames[:: cfg.priors.stride]:
        depth = priors.render_depth(frame, shapes, camera, planes=world_planes)
        edges = priors.render_edges(depth, threshold=cfg.priors.edge_threshold)
        depth_name, edge_name = priors.prior_filenames(frame.index)
        files[depth_name] = priors.encode_pgm16(depth)
        files[edge_name] = priors.encode_pgm8(edges)
    return files


def input_hashes_for(canvas: sketch.SketchCanvas, records: List[ObjectRecord]) -> dict:
    """Provenance hashes over canonical content (CLI and service agree)."""
    hashes = {"canvas": content_hash(sketch.dump_canvas(canvas).encode("utf-8"))}
    for r in records:
        if r.gesture_stroke is not None:
            hashes[f"gesture:{r.obj.id}"] = content_hash(stroke_content(r.gesture_stroke))
    return hashes


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """The whole batch path; pure given the input files and config."""
    cfg.validate()
    if cfg.canvas_path is None:
        raise MalformedRecord("pipeline needs a canvas input")
    canvas_bytes = Path(cfg.canvas_path).read_bytes()
    canvas = sketch.load_canvas(canvas_bytes)

    records = analyze_canvas(canvas, cfg)
    bind_gestures(records, cfg)
    doc = assemble_scene(records, cfg, input_hashes=input_hashes_for(canvas, records))

    world = build_world(doc)
    for body in doc.bodies:
        if body.kind != "cloth" and any(body.velocity):
            apply_gesture_impulse(world, body.id, body.velocity)
    frames = simulate(world, doc.duration)

    spec = scene_to_spec(doc)
    script = emit_script(spec)
    report = validate_script(script, spec)
    if not report.ok:
        raise SketchPlayError(f"emitted script failed validation: {report.violations}")

    return PipelineResult(
        scene=doc,
        frames=frames,
        script_text=script.text,
        prior_files=render_priors(doc, frames, cfg),
        frame_log=frame_log_bytes(doc.dt, frames),
    )


def write_artifacts(result: PipelineResult, output_dir: str) -> List[str]:
    """Write scene.json, frames.bin, script.py, and priors/; returns paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    scene_path = out / "scene.json"
    scene_path.write_text(scene_to_json(result.scene))
    paths.append(str(scene_path))

    log_path = out / "frames.bin"
    log_path.write_bytes(result.frame_log)
    paths.append(str(log_path))

    script_path = out / "script.py"
    script_path.write_text(result.script_text, newline="\n")
    paths.append(str(script_path))

    priors_dir = out / "priors"
    priors_dir.mkdir(exist_ok=True)
    for name in sorted(result.prior_files):
        (priors_dir / name).write_bytes(result.prior_files[name])
    paths.append(str(priors_dir))
    return paths
