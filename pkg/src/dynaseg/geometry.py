"""Convex hulls, minimum-area bounding rectangles, and box arithmetic.

Point coordinates are (x, y) reals. Hulls are counter-clockwise with
collinear boundary points dropped. The minimum-area enclosing rectangle
is found by rotating calipers: support points advance monotonically as
the baseline walks the hull edges, and an optimal rectangle always has
one side collinear with some hull edge.
"""

import math
from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np

from .errors import DegenerateHullError, EmptyAfterClipError

_EPS = 1e-12


@dataclass
class Polygon:
    vertices: np.ndarray  # (M, 2) float64, CCW
    degenerate: bool = False


@dataclass
class OrientedRect:
    corners: np.ndarray  # (4, 2) float64, CCW
    angle: float  # radians of the base edge vs the x-axis


@dataclass
class AABB:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def area(self):
        return max(0.0, self.x_max - self.x_min) * max(0.0, self.y_max - self.y_min)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (b[0] - o[0]) * (a[1] - o[1])


def convex_hull(points):
    """Graham scan: CCW hull with collinear boundary points dropped.

    Fewer than three distinct points, or an all-collinear set, give the
    degenerate polygon of the extreme points (flagged, never raised).
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    uniq = np.unique(pts, axis=0)
    if len(uniq) == 1:
        return Polygon(vertices=uniq.copy(), degenerate=True)

    # Pivot: lowest y, then lowest x.
    order = np.lexsort((uniq[:, 0], uniq[:, 1]))
    pivot = uniq[order[0]]
    rest = [tuple(p) for p in uniq[order[1:]]]

    def by_angle(p, q):
        s = _cross(pivot, p, q)
        if s > 0:
            return -1
        if s < 0:
            return 1
        dp = (p[0] - pivot[0]) ** 2 + (p[1] - pivot[1]) ** 2
        dq = (q[0] - pivot[0]) ** 2 + (q[1] - pivot[1]) ** 2
        return -1 if dp < dq else (1 if dp > dq else 0)

    rest.sort(key=cmp_to_key(by_angle))

    if all(_cross(pivot, rest[0], p) == 0 for p in rest[1:]):
        ends = np.array([pivot, rest[-1]])
        return Polygon(vertices=ends, degenerate=True)

    stack = [tuple(pivot), rest[0]]
    for p in rest[1:]:
        while len(stack) >= 2 and _cross(stack[-2], stack[-1], p) <= 0:
            stack.pop()
        stack.append(p)
    return Polygon(vertices=np.array(stack, dtype=np.float64), degenerate=False)


def min_area_rect(hull):
    """Minimum-area enclosing rectangle of a non-degenerate CCW hull."""
    if hull.degenerate or len(hull.vertices) < 3:
        raise DegenerateHullError("hull has no area")
    v = hull.vertices
    n = len(v)

    def proj(vec, idx):
        return v[idx, 0] * vec[0] + v[idx, 1] * vec[1]

    best = None
    j = m = l = 0  # support indices: max along edge, max normal, min along edge
    for k in range(n):
        edge = v[(k + 1) % n] - v[k]
        u = edge / np.linalg.norm(edge)
        nvec = np.array([-u[1], u[0]])  # inward-left of a CCW edge

        if k == 0:
            j = int(np.argmax(v @ u))
            m = int(np.argmax(v @ nvec))
            l = int(np.argmin(v @ u))
        for _ in range(n):  # monotone advance, bounded for safety
            if proj(u, (j + 1) % n) > proj(u, j):
                j = (j + 1) % n
            else:
                break
        for _ in range(n):
            if proj(nvec, (m + 1) % n) > proj(nvec, m):
                m = (m + 1) % n
            else:
                break
        for _ in range(n):
            if proj(u, (l + 1) % n) < proj(u, l):
                l = (l + 1) % n
            else:
                break

        lo = proj(u, l) - proj(u, k)
        hi = proj(u, j) - proj(u, k)
        height = proj(nvec, m) - proj(nvec, k)
        area = (hi - lo) * height
        if best is None or area < best[0]:
            best = (area, k, u, nvec, lo, hi, height)

    _, k, u, nvec, lo, hi, height = best
    base = v[k]
    c1 = base + lo * u
    c2 = base + hi * u
    corners = np.array([c1, c2, c2 + height * nvec, c1 + height * nvec])
    return OrientedRect(corners=corners, angle=math.atan2(u[1], u[0]))


def axis_align(rect):
    """Axis-aligned box from the coordinate extrema of the four corners."""
    xs = rect.corners[:, 0]
    ys = rect.corners[:, 1]
    return AABB(
        x_min=float(xs.min()),
        y_min=float(ys.min()),
        x_max=float(xs.max()),
        y_max=float(ys.max()),
    )


def points_aabb(points):
    """Axis-aligned box of a raw point set (degenerate-cluster fallback)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return AABB(
        x_min=float(pts[:, 0].min()),
        y_min=float(pts[:, 1].min()),
        x_max=float(pts[:, 0].max()),
        y_max=float(pts[:, 1].max()),
    )


def pad_and_clip(box, pad_frac, width, height):
    """Expand a box by ``pad_frac`` of its diagonal, round outward to
    integer pixels, and clip to the image.

    The returned box uses inclusive integer pixel bounds. Raises
    EmptyAfterClipError when the box lies entirely outside the image.
    """
    diag = math.hypot(box.x_max - box.x_min, box.y_max - box.y_min)
    pad = pad_frac * diag
    x0 = math.floor(box.x_min - pad)
    y0 = math.floor(box.y_min - pad)
    x1 = math.ceil(box.x_max + pad)
    y1 = math.ceil(box.y_max + pad)
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, width - 1), min(y1, height - 1)
    if x0 > x1 or y0 > y1:
        raise EmptyAfterClipError("box does not intersect the image")
    return AABB(x_min=int(x0), y_min=int(y0), x_max=int(x1), y_max=int(y1))
