"""Batch front door: run the recorded-file pipeline without the service.

Commands: run, kinematics, emit-script, render-priors.  Exit codes:
0 success, 2 validation/input error, 3 simulation blow-up.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import GestureBinding, PipelineConfig, load_config, override
from .errors import NumericalBlowup, SketchPlayError
from .pipeline import run_pipeline, write_artifacts

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BLOWUP = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchplay",
        description="Turn timed strokes and gestures into simulated physical scenes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full pipeline: canvas + gestures -> artifacts")
    run.add_argument("--config", help="config JSON; flags below override it")
    run.add_argument("--canvas", help="canvas JSON path")
    run.add_argument("--gesture", action="append", default=None, metavar="OBJ:PATH",
                     help="bind a gesture file to an object index, e.g. 0:swipe.jsonl")
    run.add_argument("--output-dir", help="artifact directory")
    run.add_argument("--duration", type=float, help="simulated seconds")
    run.add_argument("--dt", type=float, help="timestep seconds")
    run.add_argument("--m-hand", type=float, help="hand mass for velocity transfer")
    run.add_argument("--backend", choices=("rule", "remote"), help="inference backend")
    run.add_argument("--material-table", help="material table JSON override")
    run.add_argument("--thickness", type=float, help="extrusion thickness override")

    kin = sub.add_parser("kinematics", help="per-sample speed/direction as JSON lines")
    kin.add_argument("trajectory", help="trajectory JSONL (2D stroke or 21-keypoint records)")
    kin.add_argument("--keypoint-index", type=int, default=None,
                     help="keypoint to track for 21-point streams (default 8)")

    emit = sub.add_parser("emit-script", help="emit the scene script from a scene JSON")
    emit.add_argument("--scene", required=True, help="scene JSON path")
    emit.add_argument("--output", help="script path (default: stdout)")

    rp = sub.add_parser("render-priors", help="render edge/depth maps from a frame log")
    rp.add_argument("--scene", required=True, help="scene JSON (shapes and environment)")
    rp.add_argument("--frames", required=True, help="frame log (.bin)")
    rp.add_argument("--output-dir", default="priors", help="output directory")
    rp.add_argument("--width", type=int, default=256)
    rp.add_argument("--height", type=int, default=256)
    rp.add_argument("--stride", type=int, default=8)
    rp.add_argument("--edge-threshold", type=float, default=0.05)
    return parser


def _parse_gesture_args(args_list) -> tuple:
    bindings = []
    for item in args_list or ():
        obj, _, path = item.partition(":")
        if not path:
            raise SketchPlayError(f"--gesture wants OBJ:PATH, got {item!r}")
        bindings.append(GestureBinding(path=path, object_index=int(obj)))
    return tuple(bindings)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else PipelineConfig()
        bindings = _parse_gesture_args(args.gesture)
        cfg = override(
            cfg,
            canvas_path=args.canvas,
            bindings=bindings or None,
            output_dir=args.output_dir,
            duration=args.duration,
            dt=args.dt,
            m_hand=getattr(args, "m_hand", None),
            backend=args.backend,
            material_table_path=args.material_table,
            thickness=args.thickness,
        )
        result = run_pipeline(cfg)
    except NumericalBlowup as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (SketchPlayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    paths = write_artifacts(result, cfg.output_dir)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_kinematics(args) -> int:
    from . import trajectory

    try:
        raw = Path(args.trajectory).read_bytes()
        text = raw.decode("utf-8").strip()
        if not text:
            print("error: empty trajectory file", file=sys.stderr)
            return EXIT_VALIDATION
        if '"points"' in text.splitlines()[0]:
            frames = trajectory.ingest_keypoint_stream(raw)
            index = (args.keypoint_index if args.keypoint_index is not None
                     else trajectory.DEFAULT_FINGERTIP_INDEX)
            stroke = trajectory.extract_fingertip_stroke(frames, index)
        else:
            stroke = trajectory.ingest_stroke_stream(raw)
        samples = trajectory.estimate_kinematics(stroke)
    except (SketchPlayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for s in samples:
        print(json.dumps({
            "t": s.t,
            "speed": s.speed,
            "velocity": list(s.velocity),
            "direction": list(s.direction),
            "stationary": s.stationary,
        }))
    return EXIT_OK


def cmd_emit_script(args) -> int:
    from .emitter import emit_script, validate_script
    from .scene import scene_from_json, scene_to_spec

    try:
        doc = scene_from_json(Path(args.scene).read_text())
        spec = scene_to_spec(doc)
        script = emit_script(spec)
        report = validate_script(script, spec)
        if not report.ok:
            print(f"error: script validation failed: {report.violations}", file=sys.stderr)
            return EXIT_VALIDATION
    except (SketchPlayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.output:
        Path(args.output).write_text(script.text, newline="\n")
        print(args.output)
    else:
        sys.stdout.write(script.text)
    return EXIT_OK


def cmd_render_priors(args) -> int:
    from . import priors as priors_mod
    from .physics import read_frame_log
    from .scene import build_world, collision_shapes, scene_from_json

    try:
        doc = scene_from_json(Path(args.scene).read_text())
        body_ids = [b.id for b in doc.bodies if b.kind != "cloth"]
        _, frames = read_frame_log(args.frames, body_ids)
        shapes = collision_shapes(doc)
        camera = priors_mod.frame_scene_camera(frames, shapes,
                                               width=args.width, height=args.height)
        planes = build_world(doc).planes if doc.ground_plane else []
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for frame in frames[:: args.stride]:
            depth = priors_mod.render_depth(frame, shapes, camera, planes=planes)
            edges = priors_mod.render_edges(depth, threshold=args.edge_threshold)
            depth_name, edge_name = priors_mod.prior_filenames(frame.index)
            (out / depth_name).write_bytes(priors_mod.encode_pgm16(depth))
            (out / edge_name).write_bytes(priors_mod.encode_pgm8(edges))
    except (SketchPlayError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(str(out))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "kinematics": cmd_kinematics,
        "emit-script": cmd_emit_script,
        "render-priors": cmd_render_priors,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
