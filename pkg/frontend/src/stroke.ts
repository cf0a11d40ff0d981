// Pointer-event stroke capture: device pixels in, canvas meters out.
//
// Capture is deterministic over a recorded event list, keeps events in
// order, and never drops the final point; timestamps are wall-clock
// seconds relative to the stroke start so gesture speed is real speed.

import type { UiStroke, UiStrokePoint } from "./types.js";

export interface PointerSample {
  offsetX: number; // device pixels within the canvas element
  offsetY: number;
  timeStampMs: number; // DOM event timeStamp
}

export interface CanvasMapping {
  widthPx: number;
  heightPx: number;
  extent: [number, number]; // canvas meters, origin bottom-left
}

export function toCanvasMeters(sample: PointerSample, map: CanvasMapping): { x: number; y: number } {
  const x = (sample.offsetX / map.widthPx) * map.extent[0];
  // device y grows downward; canvas meters grow upward
  const y = (1 - sample.offsetY / map.heightPx) * map.extent[1];
  return { x, y };
}

export class StrokeRecorder {
  private samples: PointerSample[] = [];
  private active = false;

  constructor(private readonly mapping: CanvasMapping) {}

  get isActive(): boolean {
    return this.active;
  }

  begin(sample: PointerSample): void {
    this.samples = [sample];
    this.active = true;
  }

  move(sample: PointerSample): void {
    if (this.active) this.samples.push(sample);
  }

  /** Ends the stroke; returns null for clicks with fewer than 2 points. */
  end(sample: PointerSample | null): UiStroke | null {
    if (!this.active) return null;
    if (sample !== null) this.samples.push(sample);
    this.active = false;
    return buildStroke(this.samples, this.mapping);
  }
}

/** Pure capture: a recorded event list always yields the same UiStroke. */
export function buildStroke(samples: PointerSample[], mapping: CanvasMapping): UiStroke | null {
  if (samples.length < 2) return null;
  const t0 = samples[0].timeStampMs;
  const points: UiStrokePoint[] = [];
  let lastT = -Infinity;
  for (const s of samples) {
    let t = (s.timeStampMs - t0) / 1000;
    // monotone guard: coalesced events can share a timestamp
    if (t <= lastT) t = lastT + 1e-6;
    lastT = t;
    const { x, y } = toCanvasMeters(s, mapping);
    points.push({ t, x, y });
  }
  return { points };
}
