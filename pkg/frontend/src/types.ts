/** Payload shapes of the annotation HTTP API, mirrored field for field. */

export interface Selection {
  lower: number;
  upper: number;
  source?: string;
}

export interface ImageListItem {
  id: string;
  selection: Selection | null;
}

export interface ImageList {
  images: ImageListItem[];
}

export interface HistogramPayload {
  /** Raw 256-bin counts; rendered as-is, never re-binned. */
  bins: number[];
  bin_width: number;
  peak: number | null;
  proposed_lower: number | null;
  proposed_upper: number | null;
}

export interface PairPayload {
  id: string;
  width: number;
  height: number;
  input_url: string;
  gt_url: string;
  selection: Selection | null;
}

export interface SaveResponse {
  id: string;
  selection: Selection;
  saved: boolean;
  mask_path?: string;
  mask_pixels?: number;
}
