import { describe, expect, it } from "vitest";

import { StrokeRecorder, buildStroke, toCanvasMeters, type CanvasMapping, type PointerSample } from "../src/stroke.js";

const MAPPING: CanvasMapping = { widthPx: 800, heightPx: 400, extent: [1.0, 0.5] };

function drag(durationMs: number, hz: number, x0 = 100, dx = 4): PointerSample[] {
  const n = Math.round((durationMs / 1000) * hz);
  const samples: PointerSample[] = [];
  for (let i = 0; i <= n; i++) {
    samples.push({ offsetX: x0 + dx * i, offsetY: 200, timeStampMs: 1000 + (1000 * i) / hz });
  }
  return samples;
}

describe("pointer capture", () => {
  it("rejects a single click (fewer than 2 points)", () => {
    const recorder = new StrokeRecorder(MAPPING);
    recorder.begin({ offsetX: 10, offsetY: 10, timeStampMs: 5 });
    expect(recorder.end(null)).toBeNull();
  });

  it("keeps roughly one point per event for a 1 s drag at 60 Hz", () => {
    const stroke = buildStroke(drag(1000, 60), MAPPING)!;
    expect(stroke.points.length).toBeGreaterThanOrEqual(59);
    expect(stroke.points.length).toBeLessThanOrEqual(62);
    for (let i = 1; i < stroke.points.length; i++) {
      expect(stroke.points[i].t).toBeGreaterThan(stroke.points[i - 1].t);
    }
  });

  it("is deterministic over a recorded event list", () => {
    const events = drag(500, 120);
    const a = buildStroke(events, MAPPING);
    const b = buildStroke(events, MAPPING);
    expect(a).toEqual(b);
  });

  it("preserves event order and never drops the final point", () => {
    const events = drag(200, 60);
    const last = events[events.length - 1];
    const recorder = new StrokeRecorder(MAPPING);
    recorder.begin(events[0]);
    for (const e of events.slice(1, -1)) recorder.move(e);
    const stroke = recorder.end(last)!;
    expect(stroke.points.length).toBe(events.length);
    const { x, y } = toCanvasMeters(last, MAPPING);
    const tail = stroke.points[stroke.points.length - 1];
    expect(tail.x).toBe(x);
    expect(tail.y).toBe(y);
  });

  it("maps device pixels to canvas meters via the extent", () => {
    const { x, y } = toCanvasMeters({ offsetX: 400, offsetY: 100, timeStampMs: 0 }, MAPPING);
    expect(x).toBeCloseTo(0.5, 12);
    expect(y).toBeCloseTo(0.375, 12); // y flips: device-down, meters-up
  });

  it("timestamps are seconds relative to the stroke start", () => {
    const stroke = buildStroke(
      [
        { offsetX: 0, offsetY: 0, timeStampMs: 2500 },
        { offsetX: 10, offsetY: 0, timeStampMs: 2750 },
      ],
      MAPPING,
    )!;
    expect(stroke.points[0].t).toBe(0);
    expect(stroke.points[1].t).toBeCloseTo(0.25, 12);
  });
});
