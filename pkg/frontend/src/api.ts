/** Typed client for the annotation HTTP API.
 *
 * The fetch function is injectable so tests can log requests; the client
 * adds nothing beyond URL construction, JSON decoding and error mapping, and
 * it never computes mask pixels itself. Mask bytes always come from the
 * server, which is what keeps the UI byte-identical with the batch CLI.
 */

import type {
  HistogramPayload,
  ImageList,
  ImageListItem,
  PairPayload,
  SaveResponse,
  Selection,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
  text(): Promise<string>;
}>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function errorDetail(resp: { text(): Promise<string> }): Promise<string> {
  const body = await resp.text().catch(() => "");
  try {
    const parsed = JSON.parse(body) as { detail?: unknown };
    if (parsed && parsed.detail !== undefined) return JSON.stringify(parsed.detail);
  } catch {
    /* not JSON; fall through to the raw body */
  }
  return body;
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = fetch as unknown as FetchLike,
    private readonly base = "",
  ) {}

  imageUrl(id: string, which: "input" | "gt"): string {
    return `${this.base}/api/images/${encodeURIComponent(id)}/${which}.png`;
  }

  maskUrl(id: string, selection: Selection): string {
    const lower = encodeURIComponent(String(selection.lower));
    const upper = encodeURIComponent(String(selection.upper));
    return `${this.base}/api/images/${encodeURIComponent(id)}/mask` +
      `?lower=${lower}&upper=${upper}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`);
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return (await resp.json()) as T;
  }

  async listImages(): Promise<ImageListItem[]> {
    const payload = await this.getJson<ImageList>("/api/images");
    return payload.images;
  }

  histogram(id: string): Promise<HistogramPayload> {
    return this.getJson(`/api/images/${encodeURIComponent(id)}/histogram`);
  }

  pair(id: string): Promise<PairPayload> {
    return this.getJson(`/api/images/${encodeURIComponent(id)}/pair`);
  }

  /** Raw PNG bytes of the mask preview for the given interval. */
  async fetchMask(id: string, selection: Selection): Promise<ArrayBuffer> {
    const resp = await this.fetchFn(this.maskUrl(id, selection));
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return resp.arrayBuffer();
  }

  setSelection(id: string, selection: Selection): Promise<SaveResponse> {
    return this.postJson(`/api/images/${encodeURIComponent(id)}/selection`, {
      lower: selection.lower,
      upper: selection.upper,
    });
  }

  save(id: string): Promise<SaveResponse> {
    return this.postJson(`/api/images/${encodeURIComponent(id)}/save`);
  }
}
