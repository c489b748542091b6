/** Canvas and DOM bindings. All decisions live in the controller and the
 * pure helpers; this layer only draws and forwards events. */

import { barGeometry, peakX, valueToX, xToValue } from "./histogram.js";
import { maskToOverlay } from "./overlay.js";
import type { HistogramPayload, Selection } from "./types.js";

const LINE_GRAB_PX = 8;

export class HistogramView {
  logScale = false;
  private payload: HistogramPayload | null = null;
  private selection: Selection = { lower: 0, upper: 1 };
  private dragging: "lower" | "upper" | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onDrag: (line: "lower" | "upper", value: number) => void,
  ) {
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
    canvas.addEventListener("pointercancel", () => (this.dragging = null));
  }

  setHistogram(payload: HistogramPayload): void {
    this.payload = payload;
    this.draw();
  }

  setSelection(selection: Selection): void {
    this.selection = selection;
    this.draw();
  }

  toggleLog(): void {
    this.logScale = !this.logScale;
    this.draw();
  }

  private chartX(e: PointerEvent): number {
    const rect = this.canvas.getBoundingClientRect();
    return ((e.clientX - rect.left) / rect.width) * this.canvas.width;
  }

  private pointerDown(e: PointerEvent): void {
    if (!this.payload) return;
    const x = this.chartX(e);
    const lowerX = valueToX(this.selection.lower, this.canvas.width);
    const upperX = valueToX(this.selection.upper, this.canvas.width);
    const dLower = Math.abs(x - lowerX);
    const dUpper = Math.abs(x - upperX);
    if (Math.min(dLower, dUpper) > LINE_GRAB_PX * 4) return;
    // nearest line wins; ties go to the one the pointer can still move
    this.dragging = dLower <= dUpper ? "lower" : "upper";
    this.canvas.setPointerCapture(e.pointerId);
    this.onDrag(this.dragging, xToValue(x, this.canvas.width));
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.dragging) return;
    this.onDrag(this.dragging, xToValue(this.chartX(e), this.canvas.width));
  }

  private pointerUp(e: PointerEvent): void {
    if (this.dragging) {
      this.onDrag(this.dragging, xToValue(this.chartX(e), this.canvas.width));
      this.dragging = null;
    }
  }

  private draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !this.payload) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    ctx.fillStyle = "#9aa4b0";
    for (const bar of barGeometry(this.payload, width, height, this.logScale)) {
      ctx.fillRect(bar.x, bar.y, Math.max(bar.w - 0.25, 0.5), bar.h);
    }

    const px = peakX(this.payload, width);
    if (px !== null) this.vline(ctx, px, "#e03131", 1);
    this.vline(ctx, valueToX(this.selection.lower, width), "#2f9e44", 2);
    this.vline(ctx, valueToX(this.selection.upper, width), "#1971c2", 2);
  }

  private vline(
    ctx: CanvasRenderingContext2D,
    x: number,
    color: string,
    lineWidth: number,
  ): void {
    ctx.strokeStyle = color;
    ctx.lineWidth = lineWidth;
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, this.canvas.height);
    ctx.stroke();
  }
}

export class ImageView {
  private input: ImageBitmap | null = null;
  private gt: ImageBitmap | null = null;
  private overlay: ImageBitmap | null = null;
  showGt = false;

  constructor(
    private readonly mainCanvas: HTMLCanvasElement,
    private readonly gtCanvas: HTMLCanvasElement,
  ) {}

  async setPair(inputUrl: string, gtUrl: string, width: number, height: number): Promise<void> {
    this.mainCanvas.width = width;
    this.mainCanvas.height = height;
    this.gtCanvas.width = width;
    this.gtCanvas.height = height;
    this.overlay = null;
    [this.input, this.gt] = await Promise.all([
      loadBitmap(inputUrl),
      loadBitmap(gtUrl),
    ]);
    this.draw();
  }

  /** Decode the server's mask PNG and composite exactly its nonzero pixels
   * as a half-opaque highlight. */
  async setMask(png: ArrayBuffer): Promise<void> {
    const bitmap = await createImageBitmap(new Blob([png], { type: "image/png" }));
    const off = document.createElement("canvas");
    off.width = bitmap.width;
    off.height = bitmap.height;
    const octx = off.getContext("2d");
    if (!octx) return;
    octx.drawImage(bitmap, 0, 0);
    const raster = octx.getImageData(0, 0, off.width, off.height);
    const overlay = maskToOverlay(raster);
    const pixels = new Uint8ClampedArray(overlay.data);
    octx.putImageData(
      new ImageData(pixels, overlay.width, overlay.height), 0, 0);
    this.overlay = await createImageBitmap(off);
    this.draw();
  }

  toggleGt(): void {
    this.showGt = !this.showGt;
    this.gtCanvas.parentElement?.classList.toggle("hidden", !this.showGt);
    this.draw();
  }

  private draw(): void {
    const ctx = this.mainCanvas.getContext("2d");
    if (ctx && this.input) {
      ctx.drawImage(this.input, 0, 0);
      if (this.overlay) ctx.drawImage(this.overlay, 0, 0);
    }
    const gctx = this.gtCanvas.getContext("2d");
    if (gctx && this.gt && this.showGt) gctx.drawImage(this.gt, 0, 0);
  }
}

async function loadBitmap(url: string): Promise<ImageBitmap> {
  const resp = await fetch(url);
  if (!resp.ok) throw new Error(`HTTP ${resp.status} fetching ${url}`);
  return createImageBitmap(await resp.blob());
}

export class Toast {
  private timer: number | null = null;

  constructor(private readonly el: HTMLElement) {}

  show(message: string): void {
    this.el.textContent = message;
    this.el.classList.add("visible");
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.el.classList.remove("visible");
      this.timer = null;
    }, 4000) as unknown as number;
  }
}
