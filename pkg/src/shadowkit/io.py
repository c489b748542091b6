"""File I/O: PNG/JPEG reading, 8-bit PNG writing, binary mask files.

8-bit <-> float conversion is value/255 on read and round(value*255) with
clamping on write. Masks are stored as grayscale PNG with 255 = shadow.
"""

import io as _io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


def load_image(path):
    """Read a PNG or JPEG as a float image in [0, 1].

    Grayscale files come back as (H, W); everything else as (H, W, 3) RGB.
    """
    with PILImage.open(path) as im:
        if im.mode in ("L", "I;16", "I"):
            arr = np.asarray(im.convert("L"), dtype=np.float64)
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def _to_uint8(img):
    img = np.asarray(img, dtype=np.float64)
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def _to_pil(img):
    arr = _to_uint8(img)
    if arr.ndim == 2:
        return PILImage.fromarray(arr, mode="L")
    if arr.ndim == 3 and arr.shape[2] == 3:
        return PILImage.fromarray(arr, mode="RGB")
    raise ValueError(f"cannot write array of shape {arr.shape} as PNG")


def save_png(path, img):
    """Write a [0, 1] float image as an 8-bit PNG (grayscale or RGB)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _to_pil(img).save(path, format="PNG")
    return path


def png_bytes(img):
    """8-bit PNG encoding of a [0, 1] float image, as bytes."""
    buf = _io.BytesIO()
    _to_pil(img).save(buf, format="PNG")
    return buf.getvalue()


def save_mask(path, mask):
    """Write a binary mask (1 = shadow) as grayscale PNG with 255 = shadow."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    return save_png(path, (mask > 0).astype(np.float64))


def mask_png_bytes(mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    return png_bytes((mask > 0).astype(np.float64))


def load_mask(path):
    """Read a mask PNG back to a binary uint8 array (1 = shadow)."""
    arr = load_image(path)
    if arr.ndim != 2:
        arr = arr.max(axis=-1)
    return (arr >= 0.5).astype(np.uint8)
