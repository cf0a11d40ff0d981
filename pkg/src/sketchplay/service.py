"""Session-oriented HTTP API over the pipeline.

Endpoints:
    POST /sessions                         create a session
    GET  /sessions                         list session ids
    GET  /sessions/{id}                    status, revision, objects
    POST /sessions/{id}/strokes            append a stroke, resegment
    POST /sessions/{id}/objects/{oid}/gesture   bind a gesture, get v_obj
    POST /sessions/{id}/simulate           run the simulation
    GET  /sessions/{id}/frames?from=&to=   frame snapshots
    GET  /sessions/{id}/export?kind=       script | priors | frames

Sessions are isolated and serialized by a per-session lock; state
persists to one directory per session under the data dir.
"""
from __future__ import annotations

import io
import json
import os
import threading
import uuid
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, Response

from . import materials, pipeline, sketch, trajectory
from .config import PipelineConfig
from .errors import MalformedStroke, NumericalBlowup, SketchPlayError
from .physics import apply_gesture_impulse, frame_log_bytes, simulate
from .scene import build_world, scene_to_json

ADDR_ENV = "SKETCHPLAY_ADDR"
DATA_DIR_ENV = "SKETCHPLAY_DATA_DIR"
CONFIG_ENV = "SKETCHPLAY_CONFIG"  # optional pipeline config JSON for the server

STATUS_EDITING = "editing"
STATUS_SIMULATING = "simulating"
STATUS_DONE = "done"
STATUS_FAILED = "failed"


@dataclass
class Session:
    id: str
    extent: tuple = (1.0, 1.0)
    strokes: List[trajectory.Stroke] = field(default_factory=list)
    revision: int = 0
    status: str = STATUS_EDITING
    records: List[pipeline.ObjectRecord] = field(default_factory=list)
    scene_doc: object = None
    frames: list = field(default_factory=list)
    run_id: Optional[str] = None
    run_error: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def canvas(self) -> sketch.SketchCanvas:
        return sketch.SketchCanvas(strokes=tuple(self.strokes), extent=self.extent)


def _error(status_code: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": code, "detail": detail})


def _object_summary(r: pipeline.ObjectRecord) -> dict:
    return {
        "id": r.obj.id,
        "centroid": list(r.obj.centroid),
        "bbox": list(r.obj.bbox),
        "descriptors": r.obj.descriptors,
        "material": r.profile.label,
        "alpha_material": r.profile.alpha_material,
        "mass_kg": r.mass.mass_kg,
        "provenance": r.mass.provenance,
        "primitive": r.primitive.kind,
        "v_obj": list(r.v_obj),
    }


def _parse_stroke(payload, extent) -> trajectory.Stroke:
    pts = payload.get("stroke") if isinstance(payload, dict) else None
    if not isinstance(pts, list) or len(pts) < 2:
        raise MalformedStroke("stroke needs a list of >= 2 timed points")
    try:
        samples = [(float(p["t"]), float(p["x"]), float(p["y"])) for p in pts]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedStroke(f"bad stroke point: {exc}") from exc
    try:
        return trajectory.Stroke.from_xy(samples)
    except SketchPlayError as exc:
        raise MalformedStroke(str(exc)) from exc


def create_app(data_dir: Optional[str] = None, cfg: Optional[PipelineConfig] = None) -> FastAPI:
    app = FastAPI(title="sketchplay service")
    base_cfg = cfg or PipelineConfig(
        backend="remote" if os.environ.get(materials.INFER_URL_ENV) else "rule"
    )
    root = Path(data_dir or os.environ.get(DATA_DIR_ENV, "sessions"))
    sessions: Dict[str, Session] = {}
    registry_lock = threading.Lock()

    def persist(session: Session) -> None:
        sdir = root / session.id
        sdir.mkdir(parents=True, exist_ok=True)
        (sdir / "canvas.json").write_text(sketch.dump_canvas(session.canvas()))
        state = {
            "revision": session.revision,
            "status": session.status,
            "extent": list(session.extent),
            "objects": [_object_summary(r) for r in session.records],
            "run_id": session.run_id,
        }
        (sdir / "session.json").write_text(json.dumps(state, indent=2, sort_keys=True))
        if session.scene_doc is not None:
            (sdir / "scene.json").write_text(scene_to_json(session.scene_doc))

    def get_session(session_id: str) -> Optional[Session]:
        return sessions.get(session_id)

    def resegment(session: Session) -> None:
        if not session.strokes:
            session.records = []
            return
        old = {r.obj.id: r for r in session.records}
        session.records = pipeline.analyze_canvas(session.canvas(), base_cfg)
        for r in session.records:  # keep gesture bindings across resegmentation
            if r.obj.id in old:
                r.v_obj = old[r.obj.id].v_obj
                r.gesture_stroke = old[r.obj.id].gesture_stroke

    @app.post("/sessions")
    async def create_session(request: Request):
        payload = await request.json() if await request.body() else {}
        session_id = uuid.uuid4().hex[:12]
        extent = (1.0, 1.0)
        if isinstance(payload, dict) and "extent" in payload:
            extent = (float(payload["extent"][0]), float(payload["extent"][1]))
        with registry_lock:
            sessions[session_id] = Session(id=session_id, extent=extent)
        persist(sessions[session_id])
        return {"id": session_id, "status": STATUS_EDITING, "extent": list(extent)}

    @app.get("/sessions")
    def list_sessions():
        with registry_lock:
            return {"sessions": sorted(sessions)}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        return {
            "id": session.id,
            "status": session.status,
            "revision": session.revision,
            "extent": list(session.extent),
            "objects": [_object_summary(r) for r in session.records],
            "frame_count": len(session.frames),
            "run_id": session.run_id,
            "run_error": session.run_error,
        }

    @app.post("/sessions/{session_id}/strokes")
    async def submit_stroke(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        with session.lock:
            if session.status == STATUS_SIMULATING:
                return _error(409, "bad_status", "session is simulating")
            payload = await request.json()
            try:
                stroke = _parse_stroke(payload, session.extent)
                session.strokes.append(stroke)
                session.canvas()  # validates extent containment
            except (MalformedStroke, SketchPlayError) as exc:
                session.strokes = [s for s in session.strokes if s is not stroke]
                return _error(400, "malformed_stroke", str(exc))
            session.status = STATUS_EDITING
            session.revision += 1
            resegment(session)
            persist(session)
            return {
                "revision": session.revision,
                "objects": [_object_summary(r) for r in session.records],
            }

    @app.post("/sessions/{session_id}/objects/{object_id}/gesture")
    async def bind_gesture(session_id: str, object_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        with session.lock:
            record = next((r for r in session.records if r.obj.id == object_id), None)
            if record is None:
                return _error(404, "unknown_object", object_id)
            payload = await request.json()
            try:
                stroke = _parse_stroke(payload, session.extent)
            except MalformedStroke as exc:
                return _error(400, "malformed_stroke", str(exc))
            m_hand = payload.get("m_hand")
            alpha = payload.get("alpha")
            try:
                v_obj, detail = pipeline.transfer_from_stroke(
                    stroke, record, base_cfg,
                    m_hand=float(m_hand) if m_hand is not None else None,
                    alpha=float(alpha) if alpha is not None else None,
                )
            except SketchPlayError as exc:
                return _error(400, "bad_transfer", str(exc))
            record.v_obj = (v_obj[0], v_obj[2], v_obj[1])  # canvas y is world height
            record.gesture_stroke = stroke
            persist(session)
            return {
                "object": object_id,
                "v_hand": list(detail["v_hand"]),
                "v_obj": list(v_obj),
                "m_hand": detail["m_hand"],
                "m_obj": detail["m_obj"],
                "alpha": detail["alpha"],
                "factor": detail["factor"],
            }

    def _run_simulation(session: Session, duration: float) -> None:
        try:
            hashes = pipeline.input_hashes_for(session.canvas(), session.records)
            doc = pipeline.assemble_scene(session.records, base_cfg, input_hashes=hashes)
            doc.duration = duration
            world = build_world(doc)
            for body in doc.bodies:
                if body.kind != "cloth" and any(body.velocity):
                    apply_gesture_impulse(world, body.id, body.velocity)
            session.frames = simulate(world, duration)
            session.scene_doc = doc
            sdir = root / session.id
            sdir.mkdir(parents=True, exist_ok=True)
            (sdir / "frames.bin").write_bytes(frame_log_bytes(doc.dt, session.frames))
            session.status = STATUS_DONE
        except (NumericalBlowup, SketchPlayError) as exc:
            session.status = STATUS_FAILED
            session.run_error = str(exc)
        persist(session)

    @app.post("/sessions/{session_id}/simulate")
    async def run_simulation(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        with session.lock:
            if session.status == STATUS_SIMULATING:
                return _error(409, "bad_status", "a simulation is already in flight")
            if not session.records:
                return _error(400, "empty_canvas", "no objects to simulate")
            payload = await request.json() if await request.body() else {}
            duration = float(payload.get("duration", base_cfg.duration))
            if duration <= 0:
                return _error(400, "bad_duration", str(duration))
            session.run_id = uuid.uuid4().hex[:12]
            session.status = STATUS_SIMULATING
            if duration <= base_cfg.sim_sync_threshold:
                _run_simulation(session, duration)
                return {
                    "run_id": session.run_id,
                    "status": session.status,
                    "frames": len(session.frames),
                }
            worker = threading.Thread(target=_run_simulation, args=(session, duration),
                                      daemon=True)
            worker.start()
            return {"run_id": session.run_id, "status": STATUS_SIMULATING, "frames": 0}

    @app.get("/sessions/{session_id}/frames")
    def get_frames(
        session_id: str,
        start: Optional[int] = Query(None, alias="from"),
        to: Optional[int] = Query(None),
    ):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        return _frames_response(session, start, to)

    def _frames_response(session: Session, start, end):
        n = len(session.frames)
        lo = int(start) if start is not None else 0
        hi = int(end) if end is not None else n
        if lo < 0 or hi > n or lo > hi:
            return _error(416, "range_out_of_bounds", f"[{lo}, {hi}) outside [0, {n})")
        frames = []
        for f in session.frames[lo:hi]:
            frames.append({
                "index": f.index,
                "time": f.time,
                "bodies": [
                    {
                        "id": b.id,
                        "position": list(b.position),
                        "orientation": list(b.orientation),
                        "linear_velocity": list(b.linear_velocity),
                        "angular_velocity": list(b.angular_velocity),
                    }
                    for b in f.bodies
                ],
                "nodes": {k: [list(p) for p in v] for k, v in f.node_positions.items()},
            })
        return {"from": lo, "to": hi, "frames": frames}

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, kind: str = "script"):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        with session.lock:
            if kind == "script":
                from .emitter import emit_script
                from .scene import scene_to_spec
                doc = session.scene_doc
                if doc is None:
                    hashes = pipeline.input_hashes_for(session.canvas(), session.records)
                    doc = pipeline.assemble_scene(session.records, base_cfg,
                                                  input_hashes=hashes)
                script = emit_script(scene_to_spec(doc))
                return Response(content=script.text.encode("utf-8"),
                                media_type="text/x-python")
            if kind == "frames":
                if not session.frames:
                    return _error(400, "no_frames", "run a simulation first")
                data = frame_log_bytes(session.scene_doc.dt, session.frames)
                return Response(content=data, media_type="application/octet-stream")
            if kind == "priors":
                if not session.frames:
                    return _error(400, "no_frames", "run a simulation first")
                files = pipeline.render_priors(session.scene_doc, session.frames, base_cfg)
                buf = io.BytesIO()
                with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
                    for name in sorted(files):
                        info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                        zf.writestr(info, files[name])
                return Response(content=buf.getvalue(), media_type="application/zip")
            return _error(400, "unknown_kind", kind)

    return app


def main() -> None:
    import uvicorn

    from .config import load_config

    addr = os.environ.get(ADDR_ENV, "127.0.0.1:8000")
    host, _, port = addr.partition(":")
    config_path = os.environ.get(CONFIG_ENV)
    cfg = load_config(config_path) if config_path else None
    uvicorn.run(create_app(cfg=cfg), host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
