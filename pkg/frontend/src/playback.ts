// Frame playback state: a clamped cursor over the fetched range with
// play/pause and speed; rendering subscribes to cursor changes.

import type { FrameRecord } from "./types.js";

export class PlaybackState {
  private frames: FrameRecord[] = [];
  private cursorIndex = 0;
  private playing = false;
  private speed = 1.0;
  private listeners: Array<(frame: FrameRecord | null) => void> = [];
  private timer: ReturnType<typeof setInterval> | null = null;
  private frameDt = 1 / 240;

  setFrames(frames: FrameRecord[], frameDt: number): void {
    this.frames = frames;
    this.frameDt = frameDt;
    this.cursorIndex = 0;
    this.pause();
    this.emit();
  }

  get length(): number {
    return this.frames.length;
  }

  get cursor(): number {
    return this.cursorIndex;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  get playbackSpeed(): number {
    return this.speed;
  }

  current(): FrameRecord | null {
    return this.frames.length ? this.frames[this.cursorIndex] : null;
  }

  /** Scrub to an index; out-of-range values clamp to the fetched range. */
  scrub(index: number): number {
    const max = Math.max(0, this.frames.length - 1);
    this.cursorIndex = Math.min(Math.max(Math.round(index), 0), max);
    this.emit();
    return this.cursorIndex;
  }

  setSpeed(speed: number): void {
    this.speed = Math.max(0.1, speed);
    if (this.playing) {
      this.pause();
      this.play();
    }
  }

  play(): void {
    if (this.playing || !this.frames.length) return;
    this.playing = true;
    const intervalMs = (this.frameDt * 1000) / this.speed;
    this.timer = setInterval(() => {
      if (this.cursorIndex >= this.frames.length - 1) {
        this.pause();
        return;
      }
      this.cursorIndex += 1;
      this.emit();
    }, Math.max(4, intervalMs));
  }

  /** Pausing freezes the cursor where it is. */
  pause(): void {
    this.playing = false;
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  onFrame(listener: (frame: FrameRecord | null) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const frame = this.current();
    for (const l of this.listeners) l(frame);
  }
}
