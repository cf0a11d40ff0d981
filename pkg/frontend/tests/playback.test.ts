import { describe, expect, it } from "vitest";

import { PlaybackState } from "../src/playback.js";
import type { FrameRecord } from "../src/types.js";

function frames(n: number): FrameRecord[] {
  return Array.from({ length: n }, (_, i) => ({
    index: i + 1,
    time: (i + 1) / 240,
    bodies: [{ id: "b", position: [i, 0, 0], orientation: [1, 0, 0, 0],
               linear_velocity: [0, 0, 0], angular_velocity: [0, 0, 0] }],
    nodes: {},
  }));
}

describe("playback", () => {
  it("scrub to frame 0 exposes the initial pose", () => {
    const pb = new PlaybackState();
    pb.setFrames(frames(10), 1 / 240);
    pb.scrub(0);
    expect(pb.current()!.bodies[0].position[0]).toBe(0);
  });

  it("clamps out-of-range scrubs to the fetched range", () => {
    const pb = new PlaybackState();
    pb.setFrames(frames(10), 1 / 240);
    expect(pb.scrub(500)).toBe(9);
    expect(pb.scrub(-3)).toBe(0);
    expect(pb.cursor).toBe(0);
  });

  it("pause freezes the cursor", async () => {
    const pb = new PlaybackState();
    pb.setFrames(frames(50), 1 / 240);
    pb.play();
    await new Promise((r) => setTimeout(r, 30));
    pb.pause();
    const frozen = pb.cursor;
    await new Promise((r) => setTimeout(r, 30));
    expect(pb.cursor).toBe(frozen);
    expect(pb.isPlaying).toBe(false);
  });

  it("notifies listeners on scrub", () => {
    const pb = new PlaybackState();
    const seen: number[] = [];
    pb.onFrame((f) => seen.push(f ? f.index : -1));
    pb.setFrames(frames(5), 1 / 240);
    pb.scrub(3);
    expect(seen[seen.length - 1]).toBe(4);
  });

  it("handles an empty range", () => {
    const pb = new PlaybackState();
    pb.setFrames([], 1 / 240);
    expect(pb.current()).toBeNull();
    expect(pb.scrub(2)).toBe(0);
  });
});
