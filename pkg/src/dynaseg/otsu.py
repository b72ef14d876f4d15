"""Otsu's histogram threshold, shared by saliency binarization and the
static/dynamic residual split."""

import numpy as np


def otsu_threshold(values, bins=256):
    """Threshold maximizing between-class variance of a value histogram.

    Returns the right edge of the chosen low-class bin, so that
    ``value >= threshold`` selects the high class. For a constant input
    there is no split and ``inf`` is returned (nothing selected).
    Ties go to the lowest candidate bin, which keeps the rule
    deterministic.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        return np.inf
    lo = float(v.min())
    hi = float(v.max())
    if hi <= lo:
        return np.inf
    hist, edges = np.histogram(v, bins=bins, range=(lo, hi))
    hist = hist.astype(np.float64)
    centers = 0.5 * (edges[:-1] + edges[1:])

    w0 = np.cumsum(hist)
    total = w0[-1]
    w1 = total - w0
    s0 = np.cumsum(hist * centers)
    stotal = s0[-1]

    # Candidate split after bin t: class 0 = bins [0..t], class 1 = rest.
    valid = (w0[:-1] > 0) & (w1[:-1] > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = s0[:-1] / w0[:-1]
        mu1 = (stotal - s0[:-1]) / w1[:-1]
        var_between = w0[:-1] * w1[:-1] * (mu0 - mu1) ** 2
    var_between[~valid] = -np.inf
    if not valid.any():
        return np.inf
    t = int(np.argmax(var_between))
    return float(edges[t + 1])
