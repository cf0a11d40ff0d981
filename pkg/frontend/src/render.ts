// Canvas drawing: sketch strokes, segmented object boxes, and per-frame
// body outlines projected back onto the drawing plane (world x/z).

import type { FrameRecord, ObjectSummary, UiStroke } from "./types.js";

export interface ViewMapping {
  widthPx: number;
  heightPx: number;
  extent: [number, number];
}

export function metersToPx(x: number, y: number, map: ViewMapping): [number, number] {
  return [(x / map.extent[0]) * map.widthPx, (1 - y / map.extent[1]) * map.heightPx];
}

export function drawStrokes(ctx: CanvasRenderingContext2D, strokes: UiStroke[], map: ViewMapping): void {
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 1.5;
  for (const stroke of strokes) {
    ctx.beginPath();
    stroke.points.forEach((p, i) => {
      const [px, py] = metersToPx(p.x, p.y, map);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
}

export function drawObjects(ctx: CanvasRenderingContext2D, objects: ObjectSummary[],
                            selected: string | null, map: ViewMapping): void {
  for (const obj of objects) {
    const [x0, y0] = metersToPx(obj.bbox[0], obj.bbox[3], map);
    const [x1, y1] = metersToPx(obj.bbox[2], obj.bbox[1], map);
    ctx.strokeStyle = obj.id === selected ? "#d22" : "#2a6";
    ctx.lineWidth = obj.id === selected ? 2 : 1;
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
    ctx.fillStyle = "#2a6";
    ctx.font = "11px sans-serif";
    ctx.fillText(`${obj.material}`, x0 + 2, y0 - 3);
  }
}

export function drawFrame(ctx: CanvasRenderingContext2D, frame: FrameRecord,
                          sizes: Record<string, number>, map: ViewMapping): void {
  ctx.strokeStyle = "#06c";
  ctx.lineWidth = 2;
  for (const body of frame.bodies) {
    // world x stays x, world z is the drawing plane's vertical axis
    const [px, py] = metersToPx(body.position[0], body.position[2], map);
    const r = ((sizes[body.id] ?? 0.02) / map.extent[0]) * map.widthPx;
    ctx.beginPath();
    ctx.arc(px, py, Math.max(2, r), 0, 2 * Math.PI);
    ctx.stroke();
  }
  for (const nodes of Object.values(frame.nodes)) {
    ctx.fillStyle = "#b4a";
    for (const node of nodes) {
      const [px, py] = metersToPx(node[0], node[2], map);
      ctx.fillRect(px - 1, py - 1, 2, 2);
    }
  }
}
