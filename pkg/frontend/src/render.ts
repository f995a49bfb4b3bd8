/** Canvas drawing: the 64-point polyline, ghosted trail, and control-point
 * glyphs sized by weight.  The point list is drawn exactly as received; no
 * client-side smoothing. */

import type { GenerateResponse, Point } from "./api.js";

export const FIT_MARGIN = 0.1;

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Fit the curve bounding box into the canvas with a fixed relative margin. */
export function fitTransform(points: Point[], width: number, height: number): Transform {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const padX = spanX * FIT_MARGIN;
  const padY = spanY * FIT_MARGIN;
  const scale = Math.min(width / (spanX + 2 * padX), height / (spanY + 2 * padY));
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return { scale, offsetX: width / 2 - cx * scale, offsetY: height / 2 + cy * scale };
}

export function toPixel(p: Point, t: Transform): Point {
  // Screen y grows downward.
  return [p[0] * t.scale + t.offsetX, -p[1] * t.scale + t.offsetY];
}

/** The subset of CanvasRenderingContext2D the renderer uses (mockable). */
export interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
}

export interface Scene {
  response: GenerateResponse;
  trail: Point[][];
  showControlPoints: boolean;
  width: number;
  height: number;
}

function drawPolyline(ctx: Canvas2D, points: Point[], t: Transform): void {
  ctx.beginPath();
  points.forEach((p, i) => {
    const [px, py] = toPixel(p, t);
    if (i === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  });
  ctx.stroke();
}

function drawCross(ctx: Canvas2D, p: Point, t: Transform, size: number): void {
  const [px, py] = toPixel(p, t);
  ctx.beginPath();
  ctx.moveTo(px - size, py);
  ctx.lineTo(px + size, py);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(px, py - size);
  ctx.lineTo(px, py + size);
  ctx.stroke();
}

export function renderScene(ctx: Canvas2D, scene: Scene): void {
  const { response, width, height } = scene;
  ctx.clearRect(0, 0, width, height);
  const t = fitTransform(response.points, width, height);

  ctx.lineWidth = 1;
  ctx.strokeStyle = "#8899aa";
  scene.trail.forEach((ghost, i) => {
    ctx.globalAlpha = 0.35 / (i + 1);
    drawPolyline(ctx, ghost, t);
  });

  ctx.globalAlpha = 1;
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#0a3d62";
  drawPolyline(ctx, response.points, t);

  if (scene.showControlPoints && response.controlPoints && response.weights) {
    ctx.lineWidth = 1.5;
    ctx.strokeStyle = "#c0392b";
    const maxW = Math.max(...response.weights, 1e-12);
    response.controlPoints.forEach((cp, i) => {
      const size = 3 + 7 * (response.weights![i] / maxW);
      drawCross(ctx, cp, t, size);
    });
  }
}
