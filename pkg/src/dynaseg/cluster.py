"""Seeded k-means with plus-plus initialization.

Used to group dynamic interest points into one group per moving object
(the object count is prior knowledge) and to initialize color-model
components. Deterministic given the seed; assignment ties go to the
lowest cluster index; empty clusters are re-seeded to the point
farthest from their stale center.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPointsError


@dataclass
class Clustering:
    labels: np.ndarray  # (N,) int64 in [0, k)
    centers: np.ndarray  # (k, D) float64
    inertia: float  # sum of squared point-to-assigned-center distances


def kmeans(points, k, seed=0, max_iters=100):
    """Lloyd's algorithm from a k-means++ start.

    Runs until assignments stabilize or ``max_iters`` is hit. The
    returned centers are the means of their members, so re-running the
    assignment on them reproduces the labels at convergence.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        pts = pts.reshape(len(pts), -1)
    n = len(pts)
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewPointsError(f"{n} points for k={k}")

    rng = np.random.default_rng(seed)
    centers = _plus_plus_init(pts, k, rng)

    labels = _assign(pts, centers)
    for _ in range(max_iters):
        centers = _update(pts, labels, centers, k)
        new_labels = _assign(pts, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    centers = _update(pts, labels, centers, k)

    diffs = pts - centers[labels]
    inertia = float(np.einsum("ij,ij->", diffs, diffs))
    return Clustering(labels=labels, centers=centers, inertia=inertia)


def assign_labels(points, centers):
    """Nearest-center assignment with lowest-index tie-break."""
    return _assign(np.asarray(points, dtype=np.float64), centers)


def _plus_plus_init(pts, k, rng):
    n = len(pts)
    centers = np.empty((k, pts.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = pts[first]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            cum = np.cumsum(d2 / total)
            idx = int(np.searchsorted(cum, rng.random(), side="right"))
            idx = min(idx, n - 1)
        centers[c] = pts[idx]
        d2 = np.minimum(d2, ((pts - centers[c]) ** 2).sum(axis=1))
    return centers


def _assign(pts, centers):
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _update(pts, labels, centers, k):
    new = centers.copy()
    for c in range(k):
        members = labels == c
        if members.any():
            new[c] = pts[members].mean(axis=0)
        else:
            far = int(np.argmax(((pts - centers[c]) ** 2).sum(axis=1)))
            new[c] = pts[far]
    return new
