"""Run the bundled domino fixture end to end and summarize the fall.

Usage: python scripts/run_domino_demo.py [output_dir]
"""
import math
import sys
from pathlib import Path

from sketchplay.cli import main as cli_main
from sketchplay.fixtures import fixture_path
from sketchplay.physics import read_frame_log, tilt_angle
from sketchplay.scene import scene_from_json


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/domino")
    code = cli_main(["run", "--config", str(fixture_path("domino_config.json")),
                     "--output-dir", str(out)])
    if code != 0:
        return code

    doc = scene_from_json((out / "scene.json").read_text())
    ids = [b.id for b in doc.bodies if b.kind != "cloth"]
    _, frames = read_frame_log(str(out / "frames.bin"), ids)
    fall = {}
    for f in frames:
        for b in f.bodies:
            if b.id not in fall and tilt_angle(b) > math.pi / 4:
                fall[b.id] = f.time
    print(f"\n{len(doc.bodies)} dominoes, {len(frames)} frames at dt={doc.dt:.5f}s")
    for body_id in ids:
        t = fall.get(body_id)
        print(f"  {body_id}: fell at t={t:.4f}s" if t else f"  {body_id}: still standing")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
