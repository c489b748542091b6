/** Bootstrap: wire the controller to the DOM.
 *
 * Keyboard: s save+next, n/ArrowRight next, p/ArrowLeft prev,
 * g toggle ground-truth panel, l toggle log y-axis.
 */

import { ApiClient } from "./api.js";
import { AnnotationController } from "./controller.js";
import { HistogramView, ImageView, Toast } from "./view.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

function fmt(v: number): string {
  return v.toFixed(4);
}

window.addEventListener("DOMContentLoaded", () => {
  const api = new ApiClient();
  const toast = new Toast(byId("toast"));
  const imageView = new ImageView(
    byId<HTMLCanvasElement>("image-canvas"),
    byId<HTMLCanvasElement>("gt-canvas"),
  );
  const status = byId("status");
  const rangeLabel = byId("range");
  const banner = byId("banner");

  const controller = new AnnotationController(api, {
    onImage(pair) {
      banner.classList.remove("visible");
      void imageView.setPair(pair.input_url, pair.gt_url, pair.width, pair.height);
      if (controller.session.histogram) {
        histView.setHistogram(controller.session.histogram);
      }
      renderStatus();
    },
    onSelection(selection) {
      histView.setSelection(selection);
      rangeLabel.textContent =
        `[${fmt(selection.lower)}, ${fmt(selection.upper)}]`;
      renderStatus();
    },
    onOverlay(png) {
      void imageView.setMask(png);
    },
    onToast(message) {
      toast.show(message);
    },
    onSaved(id, savedCount, total) {
      toast.show(`saved ${id} (${savedCount}/${total})`);
      renderStatus();
    },
    onComplete(savedCount) {
      banner.textContent =
        `All ${savedCount} images annotated. Selections and masks are on disk.`;
      banner.classList.add("visible");
    },
  });

  const histView = new HistogramView(
    byId<HTMLCanvasElement>("hist-canvas"),
    (line, value) =>
      line === "lower" ? controller.dragLower(value) : controller.dragUpper(value),
  );

  function renderStatus(): void {
    const s = controller.session;
    const cur = s.current;
    if (!cur) {
      status.textContent = "no images in manifest";
      return;
    }
    const done = s.isSaved(cur.id) && !s.dirty ? "saved" : s.dirty ? "edited" : "proposal";
    status.textContent =
      `${cur.id}  (${s.index + 1}/${s.images.length}, ` +
      `${s.savedCount} saved)  ${done}`;
  }

  byId("log-toggle").addEventListener("click", () => histView.toggleLog());
  byId("gt-toggle").addEventListener("click", () => imageView.toggleGt());
  byId("save-btn").addEventListener("click", () => void controller.saveAndNext());
  byId("prev-btn").addEventListener("click", () => void controller.prev());
  byId("next-btn").addEventListener("click", () => void controller.next());

  window.addEventListener("keydown", (e) => {
    if (e.target instanceof HTMLInputElement) return;
    switch (e.key) {
      case "s":
        void controller.saveAndNext();
        break;
      case "n":
      case "ArrowRight":
        void controller.next();
        break;
      case "p":
      case "ArrowLeft":
        void controller.prev();
        break;
      case "g":
        imageView.toggleGt();
        break;
      case "l":
        histView.toggleLog();
        break;
    }
  });

  controller.start().catch((err) => toast.show(`failed to load: ${String(err)}`));
});
