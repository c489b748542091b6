"""CutShadow augmentation: rectangular region swap between a shadow image and
its shadow-free ground truth, with the shadow mask updated to stay consistent.

Two directions exist. Pasting the shadowed rectangle onto the shadow-free
image yields a mostly clean image with one shadowed patch; the reverse pastes
the clean rectangle onto the shadow image, erasing the shadow there. Either
way the training target stays the untouched ground truth, so the pixels of
every augmented input come from exactly one of the two source images and the
mask marks precisely the pixels that remain shadowed.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .imaging import check_image


class Direction(enum.Enum):
    SHADOW_TO_NOSHADOW = "shadow_to_noshadow"
    NOSHADOW_TO_SHADOW = "noshadow_to_shadow"


@dataclass(frozen=True)
class CutRegion:
    """Axis-aligned paste rectangle. x is the column of the left edge, y the
    row of the top edge; the region spans rows [y, y+h) and cols [x, x+w)."""

    x: int
    y: int
    w: int
    h: int
    direction: Direction

    def __post_init__(self):
        for field_name in ("x", "y", "w", "h"):
            v = getattr(self, field_name)
            if not isinstance(v, (int, np.integer)):
                raise ValueError(f"region {field_name} must be an integer, got {v!r}")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"region must span at least one pixel, got "
                             f"w={self.w}, h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"region origin must be non-negative, got "
                             f"({self.x}, {self.y})")

    @property
    def slices(self):
        return (slice(self.y, self.y + self.h), slice(self.x, self.x + self.w))

    def area_fraction(self, shape):
        return (self.w * self.h) / (shape[0] * shape[1])

    def to_dict(self):
        return {"x": int(self.x), "y": int(self.y),
                "w": int(self.w), "h": int(self.h),
                "direction": self.direction.value}

    @classmethod
    def from_dict(cls, d):
        return cls(x=int(d["x"]), y=int(d["y"]), w=int(d["w"]), h=int(d["h"]),
                   direction=Direction(d["direction"]))


def _check_triplet(image, gt, mask):
    image = check_image(image, name="image")
    gt = check_image(gt, name="gt")
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-d, got shape {mask.shape}")
    if image.shape != gt.shape:
        raise ValueError(f"dimension mismatch: image {image.shape} vs gt {gt.shape}")
    if mask.shape != image.shape[:2]:
        raise ValueError(f"dimension mismatch: mask {mask.shape} vs "
                         f"image {image.shape[:2]}")
    return image, gt, (mask > 0).astype(np.uint8)


def cutshadow(image, gt, mask, region):
    """Swap one rectangle between the pair; returns (aug_input, aug_mask).

    SHADOW_TO_NOSHADOW builds the augmented input from gt with the region
    taken from the shadow image (mask zero outside, original inside);
    NOSHADOW_TO_SHADOW builds it from the shadow image with the region taken
    from gt (original mask outside, zero inside). gt itself is never modified
    and remains the training target.
    """
    image, gt, mask = _check_triplet(image, gt, mask)
    h, w = image.shape[:2]
    if region.x + region.w > w or region.y + region.h > h:
        raise ValueError(f"region {region.to_dict()} exceeds image bounds "
                         f"({w}x{h})")

    sl = region.slices
    if region.direction is Direction.SHADOW_TO_NOSHADOW:
        aug_input = gt.copy()
        aug_input[sl] = image[sl]
        aug_mask = np.zeros_like(mask)
        aug_mask[sl] = mask[sl]
    else:
        aug_input = image.copy()
        aug_input[sl] = gt[sl]
        aug_mask = mask.copy()
        aug_mask[sl] = 0
    return aug_input, aug_mask


def sample_region(seed, img_size, area_fraction_range=(0.05, 0.4)):
    """Draw a random CutRegion for an (height, width) raster.

    The rectangle's area fraction lands inside area_fraction_range whenever an
    integer-sided rectangle can achieve it; for degenerate ranges the height
    is rounded to the nearest achievable value. Direction is a fair coin.
    Deterministic given the seed.
    """
    rng = np.random.default_rng(seed)
    height, width = int(img_size[0]), int(img_size[1])
    a_min, a_max = area_fraction_range
    if not 0.0 < a_min <= a_max <= 1.0:
        raise ValueError(f"area fraction range must satisfy 0 < min <= max <= 1, "
                         f"got {area_fraction_range}")

    total = height * width
    lo_area = a_min * total
    hi_area = a_max * total

    # widths for which some integer height keeps the area inside the band
    feasible = []
    for rw in range(1, width + 1):
        h_lo = max(1, int(np.ceil(lo_area / rw)))
        h_hi = min(height, int(np.floor(hi_area / rw)))
        if h_lo <= h_hi:
            feasible.append((rw, h_lo, h_hi))

    if feasible:
        rw, h_lo, h_hi = feasible[rng.integers(len(feasible))]
        rh = int(rng.integers(h_lo, h_hi + 1))
    else:
        # no exact fit (degenerate range on a coarse grid): round to nearest,
        # over widths whose rounded height still fits in the image
        mid_area = 0.5 * (lo_area + hi_area)
        widths = [rw for rw in range(1, width + 1)
                  if 1 <= round(mid_area / rw) <= height]
        rw = widths[rng.integers(len(widths))] if widths else 1
        rh = int(np.clip(round(mid_area / rw), 1, height))

    x = int(rng.integers(0, width - rw + 1))
    y = int(rng.integers(0, height - rh + 1))
    direction = (Direction.SHADOW_TO_NOSHADOW if rng.random() < 0.5
                 else Direction.NOSHADOW_TO_SHADOW)
    return CutRegion(x=x, y=y, w=rw, h=rh, direction=direction)


def augment_sample(image, gt, mask, seed, area_fraction_range=(0.05, 0.4),
                   rotate=True, flip=True, cut=True):
    """One augmented training triplet plus its provenance record.

    Composition order is fixed: geometric transforms (rotation by a random
    multiple of 90 degrees, then an optional vertical flip) applied to all
    three rasters so the mask tracks the geometry, then CutShadow on the
    transformed pair. Returns (aug_input, aug_gt, aug_mask, provenance).
    """
    from .imaging import flip_vertical, rotate90

    image, gt, mask = _check_triplet(image, gt, mask)
    rng = np.random.default_rng(seed)
    provenance = {"seed": int(seed) if isinstance(seed, (int, np.integer)) else None}

    k = int(rng.integers(4)) if rotate else 0
    provenance["rotate_k"] = k
    if k:
        image, gt = rotate90(image, k), rotate90(gt, k)
        mask = rotate90(mask.astype(np.float64), k).astype(np.uint8)

    flipped = bool(flip and rng.random() < 0.5)
    provenance["vertical_flip"] = flipped
    if flipped:
        image, gt = flip_vertical(image), flip_vertical(gt)
        mask = flip_vertical(mask.astype(np.float64)).astype(np.uint8)

    if cut:
        region = sample_region(rng, image.shape[:2], area_fraction_range)
        provenance["region"] = region.to_dict()
        aug_input, aug_mask = cutshadow(image, gt, mask, region)
    else:
        provenance["region"] = None
        aug_input, aug_mask = image, mask
    return aug_input, gt, aug_mask, provenance
