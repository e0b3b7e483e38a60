import { describe, expect, it } from "vitest";

import { latentToPixel, pixelToLatent } from "../src/pad.js";
import { AtlasRange } from "../src/schema.js";

const GEOM = { width: 400, height: 400 };

function range(lo: number, hi: number): AtlasRange {
  return {
    min_x: 0, max_x: 0, min_y: 0, max_y: 0,
    suggested_ui_min: lo, suggested_ui_max: hi,
  };
}

describe("pad geometry", () => {
  it("pad center maps to the latent origin for a symmetric range", () => {
    const { x, y } = pixelToLatent(200, 200, GEOM, range(-10, 10));
    expect(x).toBeCloseTo(0);
    expect(y).toBeCloseTo(0);
  });

  it("screen y is inverted: top of the pad is max latent y", () => {
    const top = pixelToLatent(200, 0, GEOM, range(-10, 10));
    const bottom = pixelToLatent(200, 400, GEOM, range(-10, 10));
    expect(top.y).toBe(10);
    expect(bottom.y).toBe(-10);
  });

  it("round trips pixel -> latent -> pixel", () => {
    const r = range(-2, 2);
    for (const [px, py] of [[0, 0], [123, 321], [400, 400], [200, 57]]) {
      const { x, y } = pixelToLatent(px!, py!, GEOM, r);
      const back = latentToPixel(x, y, GEOM, r);
      expect(back.px).toBeCloseTo(px!);
      expect(back.py).toBeCloseTo(py!);
    }
  });

  it("out-of-pad pointers clamp to the edge", () => {
    const { x, y } = pixelToLatent(-50, 1000, GEOM, range(-10, 10));
    expect(x).toBe(-10);
    expect(y).toBe(-10);
  });

  it("the same pixel means a different latent after a model switch", () => {
    // wide-range model vs narrow-range model, as with the published
    // -10..10 and -2..2 control scalings
    const pixel = { px: 300, py: 100 };
    const wide = pixelToLatent(pixel.px, pixel.py, GEOM, range(-10, 10));
    const narrow = pixelToLatent(pixel.px, pixel.py, GEOM, range(-2, 2));
    expect(wide.x).toBeCloseTo(5);
    expect(wide.y).toBeCloseTo(5);
    expect(narrow.x).toBeCloseTo(1);
    expect(narrow.y).toBeCloseTo(1);
    expect(wide.x).not.toBeCloseTo(narrow.x);
  });
});
