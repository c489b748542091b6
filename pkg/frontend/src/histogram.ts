/** Pure geometry for the 256-bin histogram chart.
 *
 * Bars map one-to-one onto the payload bins (no client-side re-binning), so
 * the annotator is looking at exactly the distribution binarize thresholds.
 * The value axis is the error value in [0, 1]; bin i spans
 * [i, i + 1) * bin_width, matching the server's binning convention.
 */

import type { HistogramPayload } from "./types.js";

export interface Bar {
  x: number;
  y: number;
  w: number;
  h: number;
}

const clamp = (v: number, lo: number, hi: number) =>
  Math.min(hi, Math.max(lo, v));

/** Pixel x of an error value on a chart `width` pixels wide. */
export function valueToX(value: number, width: number): number {
  return clamp(value, 0, 1) * width;
}

/** Error value under pixel x; clamped into [0, 1] so dragging past the chart
 * edge parks the line at the boundary. */
export function xToValue(x: number, width: number): number {
  return width <= 0 ? 0 : clamp(x / width, 0, 1);
}

/** Bar height scale: raw counts, or log10(1 + count) when logScale is on.
 * Monotone in the count either way, so bar order never changes. */
export function scaleCount(count: number, logScale: boolean): number {
  return logScale ? Math.log10(1 + count) : count;
}

/** Rectangles for all 256 bins on a width x height canvas; one bar per bin,
 * flush left-to-right in bin order. */
export function barGeometry(
  payload: HistogramPayload,
  width: number,
  height: number,
  logScale: boolean,
): Bar[] {
  const n = payload.bins.length;
  const scaled = payload.bins.map((c) => scaleCount(c, logScale));
  const top = Math.max(...scaled, 1e-12);
  const barW = width / n;
  return scaled.map((s, i) => {
    const h = (s / top) * height;
    return { x: i * barW, y: height - h, w: barW, h };
  });
}

/** Chart x of the peak marker (center of the peak bin), or null without a
 * detected peak. */
export function peakX(payload: HistogramPayload, width: number): number | null {
  if (payload.peak === null) return null;
  return ((payload.peak + 0.5) / payload.bins.length) * width;
}
