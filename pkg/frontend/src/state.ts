/** Annotation session state: which image is open, what interval is selected.
 *
 * The selection invariant lower <= upper (both in [0, 1]) is enforced here at
 * every mutation, so no drag sequence can ever produce a crossed interval;
 * the server validates it again on write.
 */

import type { HistogramPayload, ImageListItem, Selection } from "./types.js";

const clamp = (v: number, lo: number, hi: number) =>
  Math.min(hi, Math.max(lo, v));

export class AnnotationSession {
  images: ImageListItem[] = [];
  index = 0;
  histogram: HistogramPayload | null = null;
  lower = 0;
  upper = 1;
  /** True once the interval was touched and not yet saved. */
  dirty = false;
  private saved = new Set<string>();

  get current(): ImageListItem | null {
    return this.images[this.index] ?? null;
  }

  setImages(images: ImageListItem[]): void {
    this.images = images;
    // a stored selection means the image was annotated in a previous session
    for (const item of images) {
      if (item.selection && item.selection.source === "human-adjusted") {
        this.saved.add(item.id);
      }
    }
    this.index = 0;
  }

  /** Open image `index` with its histogram; the threshold lines start from
   * the stored selection when there is one, else the server proposal, else
   * the whole range. */
  open(index: number, histogram: HistogramPayload, stored: Selection | null): void {
    this.index = clamp(Math.trunc(index), 0, Math.max(0, this.images.length - 1));
    this.histogram = histogram;
    if (stored) {
      this.lower = clamp(stored.lower, 0, 1);
      this.upper = clamp(stored.upper, this.lower, 1);
    } else if (histogram.proposed_lower !== null && histogram.proposed_upper !== null) {
      this.lower = clamp(histogram.proposed_lower, 0, 1);
      this.upper = clamp(histogram.proposed_upper, this.lower, 1);
    } else {
      this.lower = 0;
      this.upper = 1;
    }
    this.dirty = false;
  }

  /** Drag the lower line: clamped so it can never cross the upper line. */
  setLower(value: number): void {
    this.lower = clamp(value, 0, this.upper);
    this.dirty = true;
  }

  /** Drag the upper line: clamped so it can never cross the lower line. */
  setUpper(value: number): void {
    this.upper = clamp(value, this.lower, 1);
    this.dirty = true;
  }

  selection(): Selection {
    return { lower: this.lower, upper: this.upper };
  }

  markSaved(id: string): void {
    this.saved.add(id);
    if (this.current?.id === id) this.dirty = false;
  }

  isSaved(id: string): boolean {
    return this.saved.has(id);
  }

  get savedCount(): number {
    return this.images.filter((i) => this.saved.has(i.id)).length;
  }

  get allDone(): boolean {
    return this.images.length > 0 && this.savedCount === this.images.length;
  }

  /** Index of the next image without a saved selection, scanning forward
   * from the current one and wrapping; null when everything is done. */
  nextUnannotated(): number | null {
    const n = this.images.length;
    for (let step = 1; step <= n; step++) {
      const i = (this.index + step) % n;
      if (!this.saved.has(this.images[i].id)) return i;
    }
    return null;
  }

  nextIndex(): number | null {
    return this.index + 1 < this.images.length ? this.index + 1 : null;
  }

  prevIndex(): number | null {
    return this.index > 0 ? this.index - 1 : null;
  }
}
