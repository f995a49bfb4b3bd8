import { describe, expect, it } from "vitest";

import type { GenerateResponse, Point } from "../src/api.js";
import { FIT_MARGIN, fitTransform, renderScene, toPixel, Canvas2D } from "../src/render.js";
import { fmt6, formatPointsDat } from "../src/format.js";

class RecordingCtx implements Canvas2D {
  ops: string[] = [];
  strokeStyle: string = "";
  lineWidth = 1;
  globalAlpha = 1;
  clearRect(): void {
    this.ops.push("clear");
  }
  beginPath(): void {
    this.ops.push("begin");
  }
  moveTo(x: number, y: number): void {
    this.ops.push(`move ${x.toFixed(1)},${y.toFixed(1)}`);
  }
  lineTo(x: number, y: number): void {
    this.ops.push(`line ${x.toFixed(1)},${y.toFixed(1)}`);
  }
  stroke(): void {
    this.ops.push("stroke");
  }
}

function response(points: Point[], cps?: Point[], weights?: number[]): GenerateResponse {
  return { points, dat: "", clamped: false, controlPoints: cps, weights };
}

describe("auto-fit transform", () => {
  it("keeps the whole curve inside the canvas with margin", () => {
    const pts: Point[] = [
      [-2, -1],
      [3, 4],
      [0, 0],
    ];
    const t = fitTransform(pts, 200, 100);
    for (const p of pts) {
      const [px, py] = toPixel(p, t);
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(200);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(100);
    }
  });

  it("applies the fixed 10% margin on the limiting axis", () => {
    const pts: Point[] = [
      [0, 0],
      [1, 0.1],
    ];
    const t = fitTransform(pts, 100, 100);
    expect(t.scale).toBeCloseTo(100 / (1 * (1 + 2 * FIT_MARGIN)), 6);
  });

  it("survives degenerate single-point curves", () => {
    const t = fitTransform([[0.5, 0.5]], 100, 100);
    expect(Number.isFinite(t.scale)).toBe(true);
  });
});

describe("scene rendering", () => {
  it("draws exactly the response polyline (one move, n-1 lines)", () => {
    const ctx = new RecordingCtx();
    const pts: Point[] = Array.from({ length: 5 }, (_, i) => [i, i * i] as Point);
    renderScene(ctx, {
      response: response(pts),
      trail: [],
      showControlPoints: false,
      width: 100,
      height: 100,
    });
    expect(ctx.ops.filter((o) => o.startsWith("move"))).toHaveLength(1);
    expect(ctx.ops.filter((o) => o.startsWith("line"))).toHaveLength(4);
  });

  it("draws one 'plus' glyph per control point when enabled", () => {
    const ctx = new RecordingCtx();
    const pts: Point[] = [
      [0, 0],
      [1, 1],
    ];
    const cps: Point[] = [
      [0, 0],
      [0.5, 1],
      [1, 0],
    ];
    renderScene(ctx, {
      response: response(pts, cps, [1, 2, 3]),
      trail: [],
      showControlPoints: true,
      width: 100,
      height: 100,
    });
    // Each glyph is two strokes; the curve itself is one.
    expect(ctx.ops.filter((o) => o === "stroke")).toHaveLength(1 + cps.length * 2);
  });

  it("ghosts trail curves before the live curve", () => {
    const ctx = new RecordingCtx();
    renderScene(ctx, {
      response: response([
        [0, 0],
        [1, 1],
      ]),
      trail: [
        [
          [0, 0],
          [2, 2],
        ],
      ],
      showControlPoints: false,
      width: 100,
      height: 100,
    });
    expect(ctx.ops.filter((o) => o === "stroke")).toHaveLength(2);
  });
});

describe("dat formatting", () => {
  it("matches the service's 6-decimal convention", () => {
    expect(fmt6(1)).toBe("1.000000");
    expect(fmt6(-0.1234564)).toBe("-0.123456");
    expect(formatPointsDat([[1, 2]])).toBe("1.000000 2.000000\n");
  });
});
