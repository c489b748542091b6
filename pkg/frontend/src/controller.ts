/** Orchestration between the session state, the API client and the view.
 *
 * The view side is reached only through the hooks object, so this whole layer
 * runs (and is tested) without a DOM. Failure policy: a failed mask preview
 * or save surfaces as a toast and the previous view state is retained.
 */

import { ApiClient } from "./api.js";
import { debounce, Debounced, Timers } from "./debounce.js";
import { AnnotationSession } from "./state.js";
import type { PairPayload, Selection } from "./types.js";

export interface ViewHooks {
  /** New image opened: pair metadata plus the histogram now in the session. */
  onImage?(pair: PairPayload): void;
  /** Threshold lines moved (drag or programmatic). */
  onSelection?(selection: Selection): void;
  /** Fresh mask PNG for the current selection; composite over the input. */
  onOverlay?(png: ArrayBuffer, selection: Selection): void;
  /** Non-blocking error notice. */
  onToast?(message: string): void;
  /** An image's selection was persisted server-side. */
  onSaved?(id: string, savedCount: number, total: number): void;
  /** Every image has a saved selection. */
  onComplete?(savedCount: number): void;
}

export const PREVIEW_DEBOUNCE_MS = 150;

export class AnnotationController {
  readonly session = new AnnotationSession();
  private readonly preview: Debounced<[]>;
  private previewSeq = 0;
  private saving = false;

  constructor(
    private readonly api: ApiClient,
    private readonly hooks: ViewHooks = {},
    debounceMs: number = PREVIEW_DEBOUNCE_MS,
    timers?: Timers,
  ) {
    this.preview = debounce(() => void this.requestPreview(), debounceMs, timers);
  }

  async start(): Promise<void> {
    this.session.setImages(await this.api.listImages());
    if (this.session.images.length === 0) return;
    const first = this.session.images.findIndex(
      (item) => !this.session.isSaved(item.id),
    );
    await this.openImage(first === -1 ? 0 : first);
  }

  async openImage(index: number): Promise<void> {
    const item = this.session.images[index];
    if (!item) return;
    this.preview.cancel();
    const [pair, hist] = await Promise.all([
      this.api.pair(item.id),
      this.api.histogram(item.id),
    ]);
    this.session.open(index, hist, pair.selection);
    this.hooks.onImage?.(pair);
    this.hooks.onSelection?.(this.session.selection());
    await this.requestPreview();
  }

  /** Drag handlers: the session clamps, then one debounced preview request
   * fires per drag burst with the final bounds. */
  dragLower(value: number): void {
    this.session.setLower(value);
    this.hooks.onSelection?.(this.session.selection());
    this.preview();
  }

  dragUpper(value: number): void {
    this.session.setUpper(value);
    this.hooks.onSelection?.(this.session.selection());
    this.preview();
  }

  /** Fetch the mask for the current selection; stale responses (a newer
   * request started meanwhile) are dropped, errors keep the old overlay. */
  private async requestPreview(): Promise<void> {
    const current = this.session.current;
    if (!current) return;
    const seq = ++this.previewSeq;
    const selection = this.session.selection();
    try {
      const png = await this.api.fetchMask(current.id, selection);
      if (seq === this.previewSeq) this.hooks.onOverlay?.(png, selection);
    } catch (err) {
      this.hooks.onToast?.(`mask preview failed: ${String(err)}`);
    }
  }

  /** Persist the current interval, then advance to the next image that has
   * no saved selection. Re-entrant calls while a save is in flight are
   * dropped, so hammering the shortcut stores one selection. */
  async saveAndNext(): Promise<void> {
    const current = this.session.current;
    if (!current || this.saving) return;
    this.saving = true;
    try {
      await this.api.setSelection(current.id, this.session.selection());
      await this.api.save(current.id);
      this.session.markSaved(current.id);
      this.hooks.onSaved?.(
        current.id,
        this.session.savedCount,
        this.session.images.length,
      );
    } catch (err) {
      this.hooks.onToast?.(`save failed: ${String(err)}`);
      return;
    } finally {
      this.saving = false;
    }
    const next = this.session.nextUnannotated();
    if (next === null) {
      this.hooks.onComplete?.(this.session.savedCount);
    } else {
      await this.openImage(next);
    }
  }

  async next(): Promise<void> {
    const i = this.session.nextIndex();
    if (i !== null) await this.openImage(i);
  }

  async prev(): Promise<void> {
    const i = this.session.prevIndex();
    if (i !== null) await this.openImage(i);
  }
}
