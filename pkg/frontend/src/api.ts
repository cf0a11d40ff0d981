// Typed wrapper over the session HTTP API; every number the UI shows
// comes from these responses, never from client-side computation.

import type {
  ApiError,
  FramesResponse,
  GestureResponse,
  SessionInfo,
  StrokeResponse,
  UiStroke,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(public readonly code: string, public readonly detail: string,
              public readonly status: number) {
    super(`${code}: ${detail}`);
  }
}

async function parse<T>(res: Response): Promise<T> {
  const body = await res.json();
  if (!res.ok) {
    const err = body as ApiError;
    throw new ApiRequestError(err.error ?? "unknown", err.detail ?? "", res.status);
  }
  return body as T;
}

export class StudioApi {
  constructor(private readonly base: string = "") {}

  async createSession(extent: [number, number]): Promise<{ id: string }> {
    const res = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ extent }),
    });
    return parse(res);
  }

  async sessionInfo(id: string): Promise<SessionInfo> {
    return parse(await fetch(`${this.base}/sessions/${id}`));
  }

  async submitStroke(id: string, stroke: UiStroke): Promise<StrokeResponse> {
    const res = await fetch(`${this.base}/sessions/${id}/strokes`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ stroke: stroke.points }),
    });
    return parse(res);
  }

  async bindGesture(
    id: string,
    objectId: string,
    stroke: UiStroke,
    overrides: { m_hand?: number; alpha?: number } = {},
  ): Promise<GestureResponse> {
    const res = await fetch(`${this.base}/sessions/${id}/objects/${objectId}/gesture`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ stroke: stroke.points, ...overrides }),
    });
    return parse(res);
  }

  async simulate(id: string, duration: number): Promise<{ run_id: string; status: string; frames: number }> {
    const res = await fetch(`${this.base}/sessions/${id}/simulate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ duration }),
    });
    return parse(res);
  }

  async frames(id: string, from: number, to: number): Promise<FramesResponse> {
    const res = await fetch(`${this.base}/sessions/${id}/frames?from=${from}&to=${to}`);
    return parse(res);
  }

  exportUrl(id: string, kind: "script" | "frames" | "priors"): string {
    return `${this.base}/sessions/${id}/export?kind=${kind}`;
  }
}

/** Format a service-provided number to 3 decimals for display, verbatim. */
export function fmt3(value: number): string {
  return value.toFixed(3);
}
