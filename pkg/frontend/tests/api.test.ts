import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiRequestError, StudioApi, fmt3 } from "../src/api.js";
import type { UiStroke } from "../src/types.js";

const GESTURE: UiStroke = {
  points: [
    { t: 0, x: 0.1, y: 0.3 },
    { t: 0.1, x: 0.3, y: 0.3 },
  ],
};

function mockFetch(status: number, body: unknown) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  globalThis.fetch = vi.fn(async (url: any, init?: any) => {
    calls.push({ url: String(url), init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }) as any;
  return calls;
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("gesture preview", () => {
  it("renders the service's v_obj verbatim to 3 decimals", async () => {
    // intercepted network traffic: the only source of the displayed number
    const served = {
      object: "obj00", v_hand: [2, 0, 0], v_obj: [0.7142857142857143, 0, 0],
      m_hand: 0.4, m_obj: 1.0, alpha: 0.1, factor: 0.35714285714285715,
    };
    mockFetch(200, served);
    const api = new StudioApi("http://svc");
    const res = await api.bindGesture("s1", "obj00", GESTURE, { alpha: 0.1 });
    const display = `(${fmt3(res.v_obj[0])}, ${fmt3(res.v_obj[1])}, ${fmt3(res.v_obj[2])})`;
    expect(display).toBe("(0.714, 0.000, 0.000)");
    expect(res.v_obj).toEqual(served.v_obj); // no client-side recomputation
  });

  it("alpha = 1 override previews exactly the served release velocity", async () => {
    const served = {
      object: "o", v_hand: [1.5, 0, 0], v_obj: [1.5, 0, 0],
      m_hand: 0.4, m_obj: 0.7, alpha: 1.0, factor: 1.0,
    };
    mockFetch(200, served);
    const api = new StudioApi("");
    const res = await api.bindGesture("s1", "o", GESTURE, { alpha: 1.0 });
    expect(res.v_obj).toEqual(res.v_hand);
  });

  it("surfaces service errors without mutating state", async () => {
    mockFetch(404, { error: "unknown_object", detail: "ghost" });
    const api = new StudioApi("");
    await expect(api.bindGesture("s1", "ghost", GESTURE)).rejects.toThrowError(ApiRequestError);
    try {
      await api.bindGesture("s1", "ghost", GESTURE);
    } catch (err) {
      const e = err as ApiRequestError;
      expect(e.code).toBe("unknown_object");
      expect(e.status).toBe(404);
    }
  });
});

describe("request shapes", () => {
  it("posts strokes to the session endpoint", async () => {
    const calls = mockFetch(200, { revision: 1, objects: [] });
    const api = new StudioApi("http://svc");
    await api.submitStroke("abc", GESTURE);
    expect(calls[0].url).toBe("http://svc/sessions/abc/strokes");
    const payload = JSON.parse(String(calls[0].init?.body));
    expect(payload.stroke).toHaveLength(2);
  });

  it("passes overrides through the gesture body", async () => {
    const calls = mockFetch(200, {
      object: "o", v_hand: [0, 0, 0], v_obj: [0, 0, 0],
      m_hand: 0.9, m_obj: 1, alpha: 0.5, factor: 0.7,
    });
    const api = new StudioApi("");
    await api.bindGesture("s", "o", GESTURE, { m_hand: 0.9, alpha: 0.5 });
    const payload = JSON.parse(String(calls[0].init?.body));
    expect(payload.m_hand).toBe(0.9);
    expect(payload.alpha).toBe(0.5);
  });

  it("fetches frame ranges with from/to query params", async () => {
    const calls = mockFetch(200, { from: 0, to: 5, frames: [] });
    const api = new StudioApi("");
    await api.frames("s", 0, 5);
    expect(calls[0].url).toBe("/sessions/s/frames?from=0&to=5");
  });
});
