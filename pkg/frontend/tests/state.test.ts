import { describe, expect, it } from "vitest";

import { AnnotationSession } from "../src/state.js";
import type { HistogramPayload } from "../src/types.js";

function hist(overrides: Partial<HistogramPayload> = {}): HistogramPayload {
  return {
    bins: new Array(256).fill(0),
    bin_width: 1 / 256,
    peak: 60,
    proposed_lower: 0.18,
    proposed_upper: 0.3,
    ...overrides,
  };
}

function images(n: number) {
  return Array.from({ length: n }, (_, i) => ({
    id: `img${i}`,
    selection: null,
  }));
}

/** Deterministic xorshift so the fuzz run is reproducible. */
function rng(seed: number): () => number {
  let s = seed >>> 0 || 1;
  return () => {
    s ^= s << 13;
    s ^= s >>> 17;
    s ^= s << 5;
    return ((s >>> 0) % 1_000_000) / 1_000_000;
  };
}

describe("selection invariant", () => {
  it("no drag sequence ever yields lower > upper or leaves [0, 1]", () => {
    const rand = rng(12345);
    const session = new AnnotationSession();
    session.setImages(images(1));
    session.open(0, hist(), null);
    for (let step = 0; step < 5000; step++) {
      const value = rand() * 3 - 1; // deliberately overshoots [0, 1]
      if (rand() < 0.5) session.setLower(value);
      else session.setUpper(value);
      expect(session.lower).toBeLessThanOrEqual(session.upper);
      expect(session.lower).toBeGreaterThanOrEqual(0);
      expect(session.upper).toBeLessThanOrEqual(1);
    }
  });

  it("dragging lower past upper clamps onto it, and vice versa", () => {
    const session = new AnnotationSession();
    session.setImages(images(1));
    session.open(0, hist(), null);
    session.setLower(0.9);
    expect(session.lower).toBe(session.upper);
    expect(session.upper).toBe(0.3);
    session.setUpper(0.05);
    expect(session.upper).toBe(session.lower);
  });
});

describe("open initialization", () => {
  it("prefers the stored selection over the proposal", () => {
    const session = new AnnotationSession();
    session.setImages(images(1));
    session.open(0, hist(), { lower: 0.4, upper: 0.55, source: "human-adjusted" });
    expect(session.lower).toBe(0.4);
    expect(session.upper).toBe(0.55);
  });

  it("falls back to the proposal, then to the full range", () => {
    const session = new AnnotationSession();
    session.setImages(images(1));
    session.open(0, hist(), null);
    expect(session.lower).toBe(0.18);
    expect(session.upper).toBe(0.3);
    session.open(0, hist({ proposed_lower: null, proposed_upper: null, peak: null }), null);
    expect(session.lower).toBe(0);
    expect(session.upper).toBe(1);
  });

  it("clears the dirty flag and sets it again on the first drag", () => {
    const session = new AnnotationSession();
    session.setImages(images(2));
    session.open(0, hist(), null);
    expect(session.dirty).toBe(false);
    session.setLower(0.2);
    expect(session.dirty).toBe(true);
    session.open(1, hist(), null);
    expect(session.dirty).toBe(false);
  });
});

describe("progress tracking", () => {
  it("counts pre-existing human selections as already annotated", () => {
    const session = new AnnotationSession();
    session.setImages([
      { id: "a", selection: { lower: 0.1, upper: 0.2, source: "human-adjusted" } },
      { id: "b", selection: { lower: 0.1, upper: 0.2, source: "proposed" } },
      { id: "c", selection: null },
    ]);
    expect(session.isSaved("a")).toBe(true);
    expect(session.isSaved("b")).toBe(false);
    expect(session.savedCount).toBe(1);
  });

  it("advances to the next unannotated image, wrapping around", () => {
    const session = new AnnotationSession();
    session.setImages(images(3));
    session.markSaved("img1");
    session.open(1, hist(), null);
    expect(session.nextUnannotated()).toBe(2);
    session.markSaved("img2");
    expect(session.nextUnannotated()).toBe(0);
    session.markSaved("img0");
    expect(session.nextUnannotated()).toBeNull();
    expect(session.allDone).toBe(true);
  });

  it("next and prev stop at the ends", () => {
    const session = new AnnotationSession();
    session.setImages(images(2));
    expect(session.prevIndex()).toBeNull();
    expect(session.nextIndex()).toBe(1);
    session.open(1, hist(), null);
    expect(session.nextIndex()).toBeNull();
    expect(session.prevIndex()).toBe(0);
  });
});
