/**
 * XY pad geometry: pixels to latent coordinates and back.
 *
 * The pad is square in latent space: both axes span the model's
 * suggested UI range. Screen y grows downward, latent y grows upward,
 * so the vertical axis flips. Pointer positions are clamped into the
 * pad, which doubles as the range clamp for outbound latent values.
 */

import { AtlasRange, clamp } from "./schema.js";

export interface PadGeometry {
  width: number;
  height: number;
}

export function pixelToLatent(
  px: number,
  py: number,
  geom: PadGeometry,
  range: AtlasRange,
): { x: number; y: number } {
  const lo = range.suggested_ui_min;
  const hi = range.suggested_ui_max;
  const fx = clamp(px / geom.width, 0, 1);
  const fy = clamp(py / geom.height, 0, 1);
  return {
    x: lo + fx * (hi - lo),
    y: lo + (1 - fy) * (hi - lo),
  };
}

export function latentToPixel(
  x: number,
  y: number,
  geom: PadGeometry,
  range: AtlasRange,
): { px: number; py: number } {
  const lo = range.suggested_ui_min;
  const hi = range.suggested_ui_max;
  const span = hi - lo || 1;
  return {
    px: ((x - lo) / span) * geom.width,
    py: (1 - (y - lo) / span) * geom.height,
  };
}
