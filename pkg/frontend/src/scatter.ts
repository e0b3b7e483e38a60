/**
 * Scatter overlay: the training corpus drawn under the performer's
 * cursor, in pad coordinates. Drawing goes through a minimal context
 * interface so tests can count and bound the dots without a real
 * canvas.
 */

import { latentToPixel, PadGeometry } from "./pad.js";
import { AtlasPoint, AtlasRange } from "./schema.js";

export interface DrawContext {
  fillStyle: string | unknown;
  strokeStyle: string | unknown;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export const DOT_RADIUS = 2.5;

export function drawScatter(
  ctx: DrawContext,
  points: AtlasPoint[],
  range: AtlasRange,
  geom: PadGeometry,
): number {
  ctx.clearRect(0, 0, geom.width, geom.height);
  ctx.fillStyle = "rgba(120, 200, 255, 0.55)";
  let drawn = 0;
  for (const point of points) {
    const { px, py } = latentToPixel(point.x, point.y, geom, range);
    ctx.beginPath();
    ctx.arc(px, py, DOT_RADIUS, 0, Math.PI * 2);
    ctx.fill();
    drawn += 1;
  }
  return drawn;
}

export function drawCrosshair(
  ctx: DrawContext,
  x: number,
  y: number,
  range: AtlasRange,
  geom: PadGeometry,
): void {
  const { px, py } = latentToPixel(x, y, geom, range);
  ctx.strokeStyle = "rgba(255, 255, 255, 0.8)";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(px, 0);
  ctx.lineTo(px, geom.height);
  ctx.moveTo(0, py);
  ctx.lineTo(geom.width, py);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(px, py, 5, 0, Math.PI * 2);
  ctx.stroke();
}
