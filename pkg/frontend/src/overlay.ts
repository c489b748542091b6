/** Mask-to-overlay pixel mapping, kept DOM-free so it can be unit tested.
 *
 * The server's mask PNG is grayscale with 0 for background and 255 for mask.
 * The overlay turns exactly the nonzero pixels into a half-opaque highlight;
 * no thresholding or smoothing happens client-side, so what the annotator
 * sees on-screen is pixel-for-pixel the server's mask.
 */

export interface RasterLike {
  width: number;
  height: number;
  /** RGBA, 4 bytes per pixel, as produced by canvas getImageData. */
  data: Uint8ClampedArray;
}

export const HIGHLIGHT: [number, number, number, number] = [255, 64, 64, 128];

export function maskToOverlay(
  mask: RasterLike,
  rgba: [number, number, number, number] = HIGHLIGHT,
): RasterLike {
  const out = new Uint8ClampedArray(mask.data.length);
  for (let i = 0; i < mask.data.length; i += 4) {
    if (mask.data[i] > 0) {
      out[i] = rgba[0];
      out[i + 1] = rgba[1];
      out[i + 2] = rgba[2];
      out[i + 3] = rgba[3];
    }
  }
  return { width: mask.width, height: mask.height, data: out };
}

/** Indices of pixels the overlay marks, for parity checks against the PNG. */
export function onPixels(overlay: RasterLike): number[] {
  const on: number[] = [];
  for (let i = 3; i < overlay.data.length; i += 4) {
    if (overlay.data[i] > 0) on.push((i - 3) / 4);
  }
  return on;
}
