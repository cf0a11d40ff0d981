import json
import time
import zipfile
from io import BytesIO

import pytest
from fastapi.testclient import TestClient

from sketchplay.cli import main as cli_main
from sketchplay.config import PipelineConfig, PriorsConfig
from sketchplay.emitter import SECTION_HEADERS
from sketchplay.fixtures import fixture_path
from sketchplay.service import create_app


@pytest.fixture()
def client(tmp_path):
    cfg = PipelineConfig(duration=0.5, thickness=0.04,
                         priors=PriorsConfig(stride=24, width=64, height=64))
    app = create_app(data_dir=str(tmp_path / "data"), cfg=cfg)
    with TestClient(app) as c:
        yield c


def square_stroke_points(t0=0.0, cx=0.5, cy=0.25, side=0.1):
    h = side / 2
    corners = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h),
               (cx - h, cy + h), (cx - h, cy - h)]
    return [{"t": t0 + 0.05 * i, "x": x, "y": y} for i, (x, y) in enumerate(corners)]


def const_velocity_gesture(vx=2.0, n=20, dt=1.0 / 60.0):
    return [{"t": i * dt, "x": 0.1 + vx * i * dt, "y": 0.3} for i in range(n)]


# --- sessions ----------------------------------------------------------------

def test_create_sessions_have_distinct_stable_ids(client):
    a = client.post("/sessions").json()["id"]
    b = client.post("/sessions").json()["id"]
    assert a != b
    assert client.get(f"/sessions/{a}").json()["id"] == a
    listing = client.get("/sessions").json()["sessions"]
    assert a in listing and b in listing


def test_unknown_session_is_404(client):
    r = client.get("/sessions/nope")
    assert r.status_code == 404
    assert r.json()["error"] == "unknown_session"


# --- strokes ------------------------------------------------------------------

def test_submit_stroke_increments_revision_and_segments(client):
    sid = client.post("/sessions").json()["id"]
    r = client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
    assert r.status_code == 200
    body = r.json()
    assert body["revision"] == 1
    assert len(body["objects"]) == 1
    assert body["objects"][0]["material"] == "wood"  # square: rule-based fallback


def test_single_point_stroke_is_rejected(client):
    sid = client.post("/sessions").json()["id"]
    r = client.post(f"/sessions/{sid}/strokes",
                    json={"stroke": [{"t": 0, "x": 0.5, "y": 0.2}]})
    assert r.status_code == 400
    assert r.json()["error"] == "malformed_stroke"


def test_submit_during_simulation_is_bad_status(tmp_path):
    cfg = PipelineConfig(duration=2.0, sim_sync_threshold=0.0)  # always background
    app = create_app(data_dir=str(tmp_path / "bg"), cfg=cfg)
    with TestClient(app) as client:
        sid = client.post("/sessions").json()["id"]
        client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
        r = client.post(f"/sessions/{sid}/simulate", json={"duration": 2.0})
        assert r.json()["status"] == "simulating"
        r = client.post(f"/sessions/{sid}/strokes",
                        json={"stroke": square_stroke_points(t0=10.0, cx=0.2)})
        assert r.status_code == 409
        assert r.json()["error"] == "bad_status"
        for _ in range(200):  # poll the background job to completion
            if client.get(f"/sessions/{sid}").json()["status"] == "done":
                break
            time.sleep(0.05)
        else:
            raise AssertionError("background simulation never finished")


# --- gesture binding -------------------------------------------------------------

def test_stationary_gesture_gives_zero_velocity(client):
    sid = client.post("/sessions").json()["id"]
    oid = client.post(f"/sessions/{sid}/strokes",
                      json={"stroke": square_stroke_points()}).json()["objects"][0]["id"]
    still = [{"t": 0.05 * i, "x": 0.4, "y": 0.4} for i in range(10)]
    r = client.post(f"/sessions/{sid}/objects/{oid}/gesture", json={"stroke": still})
    assert r.status_code == 200
    assert r.json()["v_obj"] == [0.0, 0.0, 0.0]


def test_transfer_worked_example_through_the_service(client):
    # the client config fixes thickness at 0.04 m; a wood square of side
    # sqrt(1/28) then weighs 700 * s^2 * 0.04 = 1 kg
    side = (1.0 / 28.0) ** 0.5
    sid = client.post("/sessions").json()["id"]
    stroke = square_stroke_points(cx=0.5, cy=0.25, side=side)
    obj = client.post(f"/sessions/{sid}/strokes", json={"stroke": stroke}).json()["objects"][0]
    assert obj["mass_kg"] == pytest.approx(1.0, rel=1e-9)
    r = client.post(f"/sessions/{sid}/objects/{obj['id']}/gesture",
                    json={"stroke": const_velocity_gesture(2.0),
                          "m_hand": 0.4, "alpha": 0.1})
    assert r.status_code == 200
    assert r.json()["v_obj"][0] == pytest.approx(0.714286, abs=1e-6)


def test_alpha_one_override_returns_release_velocity(client):
    sid = client.post("/sessions").json()["id"]
    oid = client.post(f"/sessions/{sid}/strokes",
                      json={"stroke": square_stroke_points()}).json()["objects"][0]["id"]
    r = client.post(f"/sessions/{sid}/objects/{oid}/gesture",
                    json={"stroke": const_velocity_gesture(1.5), "alpha": 1.0})
    body = r.json()
    assert body["v_obj"] == pytest.approx(body["v_hand"])


def test_gesture_on_unknown_object_is_404(client):
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
    r = client.post(f"/sessions/{sid}/objects/ghost/gesture",
                    json={"stroke": const_velocity_gesture()})
    assert r.status_code == 404
    assert r.json()["error"] == "unknown_object"


# --- simulation and frames ---------------------------------------------------------

def test_simulate_reports_frame_count(client):
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
    dt = 1.0 / 240.0
    r = client.post(f"/sessions/{sid}/simulate", json={"duration": 10 * dt})
    assert r.status_code == 200
    assert r.json()["status"] == "done"
    assert r.json()["frames"] == 10


def test_get_frames_range_and_bounds(client):
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
    client.post(f"/sessions/{sid}/simulate", json={"duration": 20 / 240.0})
    r = client.get(f"/sessions/{sid}/frames", params={"from": 5, "to": 10})
    assert r.status_code == 200
    frames = r.json()["frames"]
    assert len(frames) == 5
    assert frames[0]["index"] == 6  # frames are 1-based
    r = client.get(f"/sessions/{sid}/frames", params={"from": 0, "to": 999})
    assert r.status_code == 416
    assert r.json()["error"] == "range_out_of_bounds"


def test_simulation_rerun_is_byte_identical(client):
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
    client.post(f"/sessions/{sid}/objects/" +
                client.get(f"/sessions/{sid}").json()["objects"][0]["id"] +
                "/gesture", json={"stroke": const_velocity_gesture(1.0)})
    client.post(f"/sessions/{sid}/simulate", json={"duration": 0.5})
    first = client.get(f"/sessions/{sid}/export", params={"kind": "frames"}).content
    client.post(f"/sessions/{sid}/simulate", json={"duration": 0.5})
    second = client.get(f"/sessions/{sid}/export", params={"kind": "frames"}).content
    assert first == second


# --- exports --------------------------------------------------------------------------

def test_export_script_on_empty_scene(client):
    sid = client.post("/sessions").json()["id"]
    r = client.get(f"/sessions/{sid}/export", params={"kind": "script"})
    assert r.status_code == 200
    text = r.content.decode("utf-8")
    for header in SECTION_HEADERS:
        assert header in text
    assert "# object:" not in text


def test_export_unknown_kind(client):
    sid = client.post("/sessions").json()["id"]
    r = client.get(f"/sessions/{sid}/export", params={"kind": "gltf"})
    assert r.status_code == 400


def test_session_state_persists_to_disk(tmp_path):
    data_dir = tmp_path / "persist"
    app = create_app(data_dir=str(data_dir),
                     cfg=PipelineConfig(duration=0.25, thickness=0.04))
    with TestClient(app) as client:
        sid = client.post("/sessions").json()["id"]
        client.post(f"/sessions/{sid}/strokes", json={"stroke": square_stroke_points()})
        client.post(f"/sessions/{sid}/simulate", json={"duration": 0.25})
        sdir = data_dir / sid
        for name in ("canvas.json", "session.json", "scene.json", "frames.bin"):
            assert (sdir / name).exists(), name
        state = json.loads((sdir / "session.json").read_text())
        assert state["status"] == "done"
        assert state["revision"] == 1


def test_concurrent_sessions_keep_per_session_ordering(client):
    import threading

    ids = [client.post("/sessions").json()["id"] for _ in range(2)]
    errors = []

    def hammer(sid, x_base):
        try:
            for k in range(10):
                r = client.post(f"/sessions/{sid}/strokes", json={
                    "stroke": square_stroke_points(t0=2.0 * k, cx=x_base, cy=0.3,
                                                   side=0.05)})
                assert r.status_code == 200, r.text
        except AssertionError as exc:
            errors.append(exc)

    threads = [threading.Thread(target=hammer, args=(sid, 0.2 + 0.3 * i))
               for i, sid in enumerate(ids)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    for sid in ids:
        info = client.get(f"/sessions/{sid}").json()
        assert info["revision"] == 10  # no lost or interleaved updates


def test_cli_and_service_artifacts_are_byte_identical(tmp_path):
    out = tmp_path / "cli_out"
    code = cli_main(["run", "--config", str(fixture_path("domino_config.json")),
                     "--output-dir", str(out)])
    assert code == 0

    cfg = PipelineConfig(duration=1.5, thickness=0.04,
                         priors=PriorsConfig(stride=12, width=256, height=256))
    app = create_app(data_dir=str(tmp_path / "svc"), cfg=cfg)
    with TestClient(app) as client:
        sid = client.post("/sessions", json={"extent": [1.0, 0.5]}).json()["id"]
        canvas = json.loads(fixture_path("domino_canvas.json").read_text())
        objects = None
        for stroke in canvas["strokes"]:
            objects = client.post(f"/sessions/{sid}/strokes",
                                  json={"stroke": stroke}).json()["objects"]
        gesture = [json.loads(l) for l in
                   fixture_path("domino_gesture.jsonl").read_text().splitlines()]
        client.post(f"/sessions/{sid}/objects/{objects[0]['id']}/gesture",
                    json={"stroke": gesture})
        client.post(f"/sessions/{sid}/simulate", json={"duration": 1.5})

        frames = client.get(f"/sessions/{sid}/export", params={"kind": "frames"}).content
        assert frames == (out / "frames.bin").read_bytes()
        script = client.get(f"/sessions/{sid}/export", params={"kind": "script"}).content
        assert script == (out / "script.py").read_bytes()
        priors_zip = client.get(f"/sessions/{sid}/export", params={"kind": "priors"}).content
        with zipfile.ZipFile(BytesIO(priors_zip)) as zf:
            names = sorted(zf.namelist())
            disk = sorted(p.name for p in (out / "priors").glob("*.pgm"))
            assert names == disk
            for name in names:
                assert zf.read(name) == (out / "priors" / name).read_bytes()
