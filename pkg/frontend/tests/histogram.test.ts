import { describe, expect, it } from "vitest";

import { barGeometry, peakX, scaleCount, valueToX, xToValue } from "../src/histogram.js";
import type { HistogramPayload } from "../src/types.js";

function payload(bins: number[], peak: number | null = null): HistogramPayload {
  return {
    bins,
    bin_width: 1 / bins.length,
    peak,
    proposed_lower: null,
    proposed_upper: null,
  };
}

describe("value axis", () => {
  it("round-trips values through pixel space", () => {
    const width = 768;
    for (const v of [0, 0.1, 0.25, 0.5, 0.999, 1]) {
      expect(xToValue(valueToX(v, width), width)).toBeCloseTo(v, 12);
    }
  });

  it("clamps drags past either edge onto the boundary", () => {
    expect(xToValue(-50, 768)).toBe(0);
    expect(xToValue(9999, 768)).toBe(1);
    expect(valueToX(-2, 768)).toBe(0);
    expect(valueToX(7, 768)).toBe(768);
  });
});

describe("bar geometry", () => {
  it("renders one bar per payload bin, never re-binned", () => {
    const bins = Array.from({ length: 256 }, (_, i) => (i * 7919) % 101);
    const bars = barGeometry(payload(bins), 768, 200, false);
    expect(bars).toHaveLength(256);
    // bars tile the width in bin order
    expect(bars[0].x).toBe(0);
    expect(bars[255].x + bars[255].w).toBeCloseTo(768, 9);
    for (let i = 1; i < bars.length; i++) {
      expect(bars[i].x).toBeCloseTo(bars[i - 1].x + bars[i - 1].w, 9);
    }
    // heights are proportional to counts in linear mode
    const top = Math.max(...bins);
    for (let i = 0; i < bars.length; i++) {
      expect(bars[i].h).toBeCloseTo((bins[i] / top) * 200, 9);
      expect(bars[i].y).toBeCloseTo(200 - bars[i].h, 9);
    }
  });

  it("log scale preserves the ordering of bar heights", () => {
    const bins = [0, 1, 5, 120, 4000, 120, 5, 1];
    const linear = barGeometry(payload(bins), 80, 100, false);
    const logged = barGeometry(payload(bins), 80, 100, true);
    for (let i = 0; i < bins.length; i++) {
      for (let j = 0; j < bins.length; j++) {
        expect(Math.sign(linear[i].h - linear[j].h)).toBe(
          Math.sign(logged[i].h - logged[j].h),
        );
      }
    }
    // log squeezes the dynamic range so small counts become visible
    expect(logged[1].h / logged[4].h).toBeGreaterThan(linear[1].h / linear[4].h);
  });

  it("scaleCount is monotone and maps 0 to 0 in both modes", () => {
    expect(scaleCount(0, false)).toBe(0);
    expect(scaleCount(0, true)).toBe(0);
    for (const log of [false, true]) {
      let prev = -1;
      for (const c of [0, 1, 2, 10, 100, 10000]) {
        const s = scaleCount(c, log);
        expect(s).toBeGreaterThan(prev);
        prev = s;
      }
    }
  });
});

describe("peak marker", () => {
  it("is positioned at the center of the peak bin", () => {
    expect(peakX(payload(new Array(256).fill(0), 64), 768)).toBeCloseTo(
      ((64 + 0.5) / 256) * 768,
      9,
    );
  });

  it("is absent when the histogram has no peak", () => {
    expect(peakX(payload(new Array(256).fill(0), null), 768)).toBeNull();
  });
});
