"""Motion-vector matrix factorization and static/dynamic separation.

The N x 2 matrix of match displacements is factored by a closed-form
SVD (eigen-decomposition of the 2 x 2 Gram matrix). With mostly-static
scenes the dominant singular direction carries the camera-induced
motion; removing that rank-1 component leaves per-row residuals that
are near zero for static points and large for points on moving objects.
Rows are classified by an Otsu threshold over the residual norms, with
a rank-ratio guard that declares the scene static when the displacement
matrix is essentially rank one. A second factorization of the dynamic
rows prunes outliers that do not align with the dominant object motion.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, TooFewMatchesError
from .otsu import otsu_threshold

_EPS = 1e-12


@dataclass
class MotionMatrix:
    points_a: np.ndarray  # (N, 2) float64, (x, y) in image A
    points_b: np.ndarray  # (N, 2) float64, (x, y) in image B
    w: np.ndarray  # (N, 2) float64, row i = points_b[i] - points_a[i]


@dataclass
class Svd2:
    u: np.ndarray  # (N, 2), orthonormal columns (second column zero if N == 1)
    d: np.ndarray  # (2,), singular values, d[0] >= d[1] >= 0
    v: np.ndarray  # (2, 2), orthonormal columns


@dataclass
class DynamicPoints:
    indices: np.ndarray  # subset of row indices flagged dynamic
    residual_norms: np.ndarray  # residual norm per flagged index


def build_motion_matrix(matches):
    """Displacement matrix from a match set; row i = pB_i - pA_i."""
    if len(matches) == 0:
        raise EmptyInputError("no matches")
    pa = np.asarray(matches.points_a, dtype=np.float64)
    pb = np.asarray(matches.points_b, dtype=np.float64)
    return MotionMatrix(points_a=pa, points_b=pb, w=pb - pa)


def svd2(w):
    """Closed-form SVD of an N x 2 real matrix.

    Eigen-decomposition of W'W gives the right singular vectors and
    squared singular values; left vectors follow as W v / sigma, with
    zero-sigma columns completed to an orthonormal pair (for N >= 2).
    The zero matrix yields sigma = (0, 0) and V = I.
    """
    w = np.asarray(w, dtype=np.float64).reshape(-1, 2)
    n = w.shape[0]
    if n < 1:
        raise EmptyInputError("empty matrix")

    a = float(w[:, 0] @ w[:, 0])
    b = float(w[:, 0] @ w[:, 1])
    c = float(w[:, 1] @ w[:, 1])
    mean = 0.5 * (a + c)
    half_gap = math.hypot(0.5 * (a - c), b)
    lam1 = mean + half_gap
    lam2 = max(mean - half_gap, 0.0)
    s1 = math.sqrt(max(lam1, 0.0))
    s2 = math.sqrt(lam2)

    if half_gap <= _EPS * max(1.0, mean):
        v = np.eye(2)
    else:
        # Two algebraically equivalent eigenvector expressions; pick the
        # better conditioned one.
        cand1 = np.array([b, lam1 - a])
        cand2 = np.array([lam1 - c, b])
        v1 = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
        nrm = np.linalg.norm(v1)
        if nrm <= _EPS:
            v = np.eye(2)
        else:
            v1 = v1 / nrm
            v = np.column_stack([v1, [-v1[1], v1[0]]])

    scale = math.sqrt(a + c)
    tol = _EPS * max(1.0, scale)
    u = np.zeros((n, 2), dtype=np.float64)
    for i, s in enumerate((s1, s2)):
        if s > tol:
            u[:, i] = (w @ v[:, i]) / s
        elif n >= 2:
            u[:, i] = _complete_column(u, i, n)
        # else: N == 1 and no second orthonormal direction exists in R^1;
        # the column stays zero (sigma is zero, so reconstruction is exact).
    return Svd2(u=u, d=np.array([s1, s2]), v=v)


def _complete_column(u, i, n):
    prev = u[:, :i]
    for j in range(n):
        cand = np.zeros(n)
        cand[j] = 1.0
        cand -= prev @ (prev.T @ cand)
        nrm = np.linalg.norm(cand)
        if nrm > 0.5:
            return cand / nrm
    raise AssertionError("orthonormal completion failed")


def split_static_dynamic(m, rank_ratio_min=0.02, bins=64):
    """Flag rows whose motion departs from the dominant (camera) motion.

    The rank-1 component along the dominant singular direction is
    removed; rows whose residual norm clears an Otsu threshold over the
    residual-norm histogram are dynamic. If the second singular value is
    below ``rank_ratio_min`` of the first, all displacements fit one
    direction and the scene is declared static (no dynamic points).
    """
    w = m.w
    n = w.shape[0]
    if n < 3:
        raise TooFewMatchesError(f"need at least 3 matches, got {n}")

    dec = svd2(w)
    s1, s2 = dec.d
    if s2 / max(s1, _EPS) < rank_ratio_min:
        empty = np.array([], dtype=np.int64)
        return DynamicPoints(indices=empty, residual_norms=np.array([]))

    residual = w - np.outer(dec.u[:, 0] * s1, dec.v[:, 0])
    norms = np.linalg.norm(residual, axis=1)
    thr = otsu_threshold(norms, bins=bins)
    idx = np.nonzero(norms >= thr)[0]
    return DynamicPoints(indices=idx, residual_norms=norms[idx])


def prune_outliers(m, dynamic, cos_min=0.9):
    """Drop dynamic rows not aligned with the dominant object motion.

    The dominant right singular vector of the dynamic submatrix defines
    the object direction; rows keep their flag when the absolute cosine
    between the row and that direction is at least ``cos_min``. Never
    adds rows; identical dynamic rows are all kept.
    """
    if len(dynamic.indices) == 0:
        return DynamicPoints(
            indices=np.array([], dtype=np.int64), residual_norms=np.array([])
        )
    sub = m.w[dynamic.indices]
    dec = svd2(sub)
    along = np.abs(sub @ dec.v[:, 0])
    norms = np.linalg.norm(sub, axis=1)
    cos = along / np.maximum(norms, _EPS)
    keep = cos >= cos_min
    return DynamicPoints(
        indices=dynamic.indices[keep],
        residual_norms=dynamic.residual_norms[keep],
    )
