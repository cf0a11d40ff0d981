import json

import pytest

from sketchplay.cli import main
from sketchplay.fixtures import fixture_path

DOMINO_CONFIG = str(fixture_path("domino_config.json"))


def run_cli(*argv):
    return main(list(argv))


def test_missing_canvas_exits_2(tmp_path, capsys):
    code = run_cli("run", "--canvas", str(tmp_path / "nope.json"),
                   "--output-dir", str(tmp_path / "out"))
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_domino_fixture_writes_expected_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli("run", "--config", DOMINO_CONFIG, "--output-dir", str(out))
    assert code == 0
    expected = [
        out / "scene.json",
        out / "frames.bin",
        out / "script.py",
        out / "priors" / "depth_000001.pgm",
        out / "priors" / "edge_000001.pgm",
    ]
    for path in expected:
        assert path.exists(), path
    assert len(expected) == 5


def test_domino_fixture_is_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("run", "--config", DOMINO_CONFIG, "--output-dir", str(out1)) == 0
    assert run_cli("run", "--config", DOMINO_CONFIG, "--output-dir", str(out2)) == 0
    files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
    assert files1 == files2
    for rel in files1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel


def test_kinematics_fixture_prints_speed_5(tmp_path, capsys):
    path = tmp_path / "move.jsonl"
    path.write_text('{"t": 0.0, "x": 0.0, "y": 0.0}\n{"t": 0.1, "x": 0.3, "y": 0.4}\n')
    assert run_cli("kinematics", str(path)) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
    assert len(lines) == 2
    assert lines[0]["speed"] == pytest.approx(5.0)
    assert lines[0]["direction"] == pytest.approx([0.6, 0.8, 0.0])


def test_kinematics_empty_file_exits_2(tmp_path, capsys):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert run_cli("kinematics", str(path)) == 2


def test_kinematics_stationary_fixture(tmp_path, capsys):
    path = tmp_path / "still.jsonl"
    path.write_text("\n".join(
        json.dumps({"t": 0.1 * i, "x": 0.5, "y": 0.5}) for i in range(5)))
    assert run_cli("kinematics", str(path)) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
    assert all(l["stationary"] for l in lines)


def test_kinematics_on_keypoint_stream(tmp_path, capsys):
    recs = []
    for i in range(3):
        pts = [[0.0, 0.0, 0.0]] * 21
        pts[8] = [0.1 * i, 0.0, 0.0]
        recs.append(json.dumps({"t": 0.1 * i, "points": pts}))
    path = tmp_path / "hand.jsonl"
    path.write_text("\n".join(recs))
    assert run_cli("kinematics", str(path)) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
    assert lines[1]["speed"] == pytest.approx(1.0)


def test_emit_script_subcommand(tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli("run", "--config", DOMINO_CONFIG, "--output-dir", str(out)) == 0
    capsys.readouterr()
    script_path = tmp_path / "standalone.py"
    assert run_cli("emit-script", "--scene", str(out / "scene.json"),
                   "--output", str(script_path)) == 0
    assert script_path.read_bytes() == (out / "script.py").read_bytes()


def test_render_priors_subcommand_matches_run_output(tmp_path):
    out = tmp_path / "out"
    assert run_cli("run", "--config", DOMINO_CONFIG, "--output-dir", str(out)) == 0
    rendered = tmp_path / "priors2"
    assert run_cli("render-priors", "--scene", str(out / "scene.json"),
                   "--frames", str(out / "frames.bin"),
                   "--output-dir", str(rendered),
                   "--width", "256", "--height", "256", "--stride", "12") == 0
    originals = sorted((out / "priors").glob("*.pgm"))
    assert originals
    for orig in originals:
        assert (rendered / orig.name).read_bytes() == orig.read_bytes()


def test_blowup_exits_3(tmp_path, capsys):
    # a 5e6 m/s swipe launches the first box past the 1e6 m divergence limit
    canvas = json.loads(fixture_path("domino_canvas.json").read_text())
    canvas_path = tmp_path / "canvas.json"
    canvas_path.write_text(json.dumps(canvas))
    gesture_path = tmp_path / "insane.jsonl"
    gesture_path.write_text("\n".join(
        json.dumps({"t": i / 60.0, "x": 5e6 * i / 60.0, "y": 0.2}) for i in range(10)))
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "canvas": str(canvas_path),
        "bindings": [{"path": str(gesture_path), "object_index": 0}],
        "duration": 1.5,
        "thickness": 0.04,
    }))
    code = run_cli("run", "--config", str(config_path),
                   "--output-dir", str(tmp_path / "out"))
    assert code == 3
    assert "diverged" in capsys.readouterr().err


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("--help")
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for cmd in ("run", "kinematics", "emit-script", "render-priors"):
        assert cmd in out
