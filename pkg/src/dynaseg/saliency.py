"""Patch-distinctness saliency.

A patch is salient when it is hard to explain by the rest of the image:
its pattern distinctness is the L1 norm of its coordinates in the
principal-component basis of all sampled patches (mean-subtracted), and
its color distinctness is the Lab distance of its mean color to the
image mean color. Per-pixel scores come from averaging the overlapping
patch scores, and the map is min-max normalized to [0, 1].

The sample grid is built symmetric under horizontal/vertical mirroring,
so the score map commutes with image flips (center prior disabled).
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError
from .otsu import otsu_threshold


@dataclass
class SaliencyParams:
    patch_size: int = 7
    stride: int = 4
    center_prior_weight: float = 0.25

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not 0.0 <= self.center_prior_weight <= 1.0:
            raise ValueError("center_prior_weight must be in [0, 1]")


def compute_saliency(img_lab, params=None):
    """Score every pixel of a Lab image in [0, 1]; higher = more salient.

    Raises DimensionError when the image is smaller than one patch.
    A constant image has no distinct patch anywhere and yields the
    all-zero map.
    """
    if params is None:
        params = SaliencyParams()
    img = np.asarray(img_lab, dtype=np.float64)
    h, w = img.shape[:2]
    ps = params.patch_size
    if h < ps or w < ps:
        raise DimensionError(f"image {w}x{h} smaller than patch {ps}x{ps}")
    half = ps // 2

    rows = _mirror_grid(h, half, params.stride)
    cols = _mirror_grid(w, half, params.stride)

    windows = sliding_window_view(img, (ps, ps), axis=(0, 1))
    patches = windows[rows[:, None] - half, cols[None, :] - half]
    n = len(rows) * len(cols)
    flat = patches.reshape(n, -1)

    # Pattern distinctness: L1 norm of the mean-subtracted patch expressed
    # in the principal-component basis of the sample set.
    centered = flat - flat.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    scores = centered @ vt.T
    pattern = np.abs(scores).sum(axis=1)

    # Color distinctness: patch mean color vs. whole-image mean color.
    patch_means = patches.mean(axis=(3, 4)).reshape(n, 3)
    img_mean = img.reshape(-1, 3).mean(axis=0)
    color = np.linalg.norm(patch_means - img_mean, axis=1)

    per_patch = (pattern * color).reshape(len(rows), len(cols))

    acc = np.zeros((h, w), dtype=np.float64)
    cnt = np.zeros((h, w), dtype=np.float64)
    for i, cy in enumerate(rows):
        ys = slice(cy - half, cy + half + 1)
        for j, cx in enumerate(cols):
            xs = slice(cx - half, cx + half + 1)
            acc[ys, xs] += per_patch[i, j]
            cnt[ys, xs] += 1.0
    smap = np.divide(acc, cnt, out=np.zeros_like(acc), where=cnt > 0)

    if params.center_prior_weight > 0.0:
        smap = smap * _center_prior(h, w, params.center_prior_weight)

    return _minmax(smap)


def saliency_mask(smap):
    """Binarize a saliency map with Otsu's threshold (256 bins).

    A constant map has nothing to separate and gives the all-false mask.
    """
    smap = np.asarray(smap, dtype=np.float64)
    thr = otsu_threshold(smap, bins=256)
    return smap >= thr


def _mirror_grid(extent, half, stride):
    """Patch-center positions: a strided grid unioned with its mirror."""
    base = np.arange(half, extent - half, stride)
    mirrored = extent - 1 - base
    return np.unique(np.concatenate([base, mirrored]))


def _center_prior(h, w, weight):
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    sigma = max(h, w) / 3.0
    yy, xx = np.mgrid[0:h, 0:w]
    g = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma * sigma))
    return (1.0 - weight) + weight * g


def _minmax(smap):
    lo = smap.min()
    hi = smap.max()
    if hi <= lo:
        return np.zeros_like(smap)
    return (smap - lo) / (hi - lo)
