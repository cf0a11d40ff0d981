// Studio wiring: draw strokes, record a gesture, bind it to an object,
// tune m_hand / alpha, simulate, scrub the result.

import { ApiRequestError, StudioApi, fmt3 } from "./api.js";
import { PlaybackState } from "./playback.js";
import { drawFrame, drawObjects, drawStrokes } from "./render.js";
import { StrokeRecorder, type PointerSample } from "./stroke.js";
import type { GestureResponse, ObjectSummary, UiStroke } from "./types.js";

const EXTENT: [number, number] = [1.0, 0.5];
const FRAME_DT = 1 / 240;

type Mode = "draw" | "gesture";

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function sampleOf(ev: PointerEvent): PointerSample {
  return { offsetX: ev.offsetX, offsetY: ev.offsetY, timeStampMs: ev.timeStamp };
}

async function start() {
  const canvas = el<HTMLCanvasElement>("studio-canvas");
  const ctx = canvas.getContext("2d")!;
  const banner = el<HTMLDivElement>("error-banner");
  const objectList = el<HTMLSelectElement>("object-list");
  const preview = el<HTMLDivElement>("gesture-preview");
  const alphaSlider = el<HTMLInputElement>("alpha-slider");
  const alphaLabel = el<HTMLSpanElement>("alpha-value");
  const mHandInput = el<HTMLInputElement>("m-hand");
  const scrub = el<HTMLInputElement>("scrub-bar");
  const playBtn = el<HTMLButtonElement>("play-pause");
  const frameLabel = el<HTMLSpanElement>("frame-label");

  const mapping = { widthPx: canvas.width, heightPx: canvas.height, extent: EXTENT };
  const api = new StudioApi("");
  const session = await api.createSession(EXTENT);

  const strokes: UiStroke[] = [];
  let objects: ObjectSummary[] = [];
  let selectedObject: string | null = null;
  let mode: Mode = "draw";
  let lastGesture: GestureResponse | null = null;
  const playback = new PlaybackState();
  const recorder = new StrokeRecorder(mapping);

  const showError = (message: string) => {
    banner.textContent = message;
    banner.style.display = "block";
  };
  const clearError = () => {
    banner.style.display = "none";
  };

  const redraw = () => {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    drawStrokes(ctx, strokes, mapping);
    drawObjects(ctx, objects, selectedObject, mapping);
    const frame = playback.current();
    if (frame) {
      const sizes: Record<string, number> = {};
      for (const o of objects) sizes[o.id] = (o.bbox[2] - o.bbox[0]) / 2;
      drawFrame(ctx, frame, sizes, mapping);
    }
  };

  const refreshObjects = (next: ObjectSummary[]) => {
    objects = next;
    objectList.innerHTML = "";
    for (const o of objects) {
      const opt = document.createElement("option");
      opt.value = o.id;
      // every displayed number is the service's, formatted verbatim
      opt.textContent = `${o.id.slice(0, 8)} ${o.material} m=${fmt3(o.mass_kg)}kg`;
      objectList.appendChild(opt);
    }
    if (objects.length && !objects.some((o) => o.id === selectedObject)) {
      selectedObject = objects[0].id;
      objectList.value = selectedObject;
    }
  };

  const renderPreview = (g: GestureResponse) => {
    preview.textContent =
      `v_obj = (${fmt3(g.v_obj[0])}, ${fmt3(g.v_obj[1])}, ${fmt3(g.v_obj[2])}) m/s · ` +
      `factor ${fmt3(g.factor)} · m_obj ${fmt3(g.m_obj)} kg`;
  };

  canvas.addEventListener("pointerdown", (ev) => {
    recorder.begin(sampleOf(ev));
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (recorder.isActive) recorder.move(sampleOf(ev));
  });
  canvas.addEventListener("pointerup", async (ev) => {
    const stroke = recorder.end(sampleOf(ev));
    if (!stroke) return; // single click: fewer than 2 points, rejected
    clearError();
    try {
      if (mode === "draw") {
        strokes.push(stroke);
        const res = await api.submitStroke(session.id, stroke);
        refreshObjects(res.objects);
      } else if (selectedObject) {
        const overrides: { m_hand?: number; alpha?: number } = {};
        if (mHandInput.value) overrides.m_hand = Number(mHandInput.value);
        if (alphaSlider.dataset.touched === "1") overrides.alpha = Number(alphaSlider.value);
        lastGesture = await api.bindGesture(session.id, selectedObject, stroke, overrides);
        renderPreview(lastGesture);
      }
    } catch (err) {
      if (err instanceof ApiRequestError) showError(`${err.code}: ${err.detail}`);
      else showError(String(err));
    }
    redraw();
  });

  el<HTMLButtonElement>("mode-draw").addEventListener("click", () => {
    mode = "draw";
  });
  el<HTMLButtonElement>("mode-gesture").addEventListener("click", () => {
    mode = "gesture";
  });
  objectList.addEventListener("change", () => {
    selectedObject = objectList.value;
    redraw();
  });
  alphaSlider.addEventListener("input", () => {
    alphaSlider.dataset.touched = "1";
    alphaLabel.textContent = alphaSlider.value;
  });

  el<HTMLButtonElement>("simulate").addEventListener("click", async () => {
    clearError();
    try {
      const duration = Number(el<HTMLInputElement>("duration").value || "1.5");
      const run = await api.simulate(session.id, duration);
      const res = await api.frames(session.id, 0, run.frames);
      playback.setFrames(res.frames, FRAME_DT);
      scrub.max = String(Math.max(0, res.frames.length - 1));
      scrub.value = "0";
    } catch (err) {
      if (err instanceof ApiRequestError) showError(`${err.code}: ${err.detail}`);
      else showError(String(err));
    }
  });

  playback.onFrame((frame) => {
    frameLabel.textContent = frame ? `frame ${frame.index} · t=${fmt3(frame.time)}s`
                                   : "no frames";
    scrub.value = String(playback.cursor);
    redraw();
  });

  scrub.addEventListener("input", () => {
    playback.pause();
    playBtn.textContent = "play";
    playback.scrub(Number(scrub.value));
  });
  playBtn.addEventListener("click", () => {
    if (playback.isPlaying) {
      playback.pause();
      playBtn.textContent = "play";
    } else {
      playback.play();
      playBtn.textContent = "pause";
    }
  });
  el<HTMLSelectElement>("speed").addEventListener("change", (ev) => {
    playback.setSpeed(Number((ev.target as HTMLSelectElement).value));
  });

  el<HTMLAnchorElement>("export-script").href = api.exportUrl(session.id, "script");
  el<HTMLAnchorElement>("export-frames").href = api.exportUrl(session.id, "frames");
  el<HTMLAnchorElement>("export-priors").href = api.exportUrl(session.id, "priors");

  redraw();
}

if (typeof document !== "undefined" && document.getElementById("studio-canvas")) {
  start().catch((err) => console.error("studio failed to start", err));
}
