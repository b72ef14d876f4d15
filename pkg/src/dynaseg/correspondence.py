"""Dense nearest-neighbor patch correspondence with per-match confidence.

The field is computed by seeded random initialization followed by
alternating forward/backward scans that propagate good offsets from
already-scanned neighbors, plus a random search around the current
target with exponentially shrinking radius. The patch distance is the
sum of squared Lab differences. Everything is deterministic given the
seed (a self-contained splitmix64 stream drives all random draws).

Confidence of a match is the product of a distance term
``exp(-dist / sigma)`` and a coherence term: the fraction of pixels in
a square neighborhood whose offsets agree with the pixel's offset to
within one pixel per component. Isolated lucky matches score low on
coherence; smooth correct regions score near one.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionError

_EPS = 1e-12


@dataclass
class CorrParams:
    patch_size: int = 7
    iterations: int = 5
    rng_seed: int = 0
    sigma_dist: float | None = None  # None: median converged patch distance
    coherence_radius: int = 3

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.sigma_dist is not None and not self.sigma_dist > 0:
            raise ValueError("sigma_dist must be positive")
        if self.coherence_radius < 1:
            raise ValueError("coherence_radius must be >= 1")


@dataclass
class CorrespondenceField:
    """Per-pixel (dx, dy) offsets from image A into image B, with patch
    distances. ``offset[y, x]`` targets ``(x + dx, y + dy)`` in B, which
    always lies inside B's valid patch domain."""

    width: int
    height: int
    offset: np.ndarray  # (H, W, 2) int32, last axis = (dx, dy)
    dist: np.ndarray  # (H, W) float64, >= 0


@dataclass
class MatchSet:
    """Filtered high-confidence point pairs, (x, y) coordinates."""

    points_a: np.ndarray  # (N, 2) int32
    points_b: np.ndarray  # (N, 2) int32
    confidence: np.ndarray  # (N,) float64 in [0, 1]

    def __len__(self):
        return len(self.points_a)

    def to_records(self):
        return [
            {
                "pA": [int(x), int(y)],
                "pB": [int(bx), int(by)],
                "conf": float(c),
            }
            for (x, y), (bx, by), c in zip(
                self.points_a, self.points_b, self.confidence
            )
        ]


@njit(cache=True, inline="always")
def _rng_next(state):
    # splitmix64; wraps mod 2**64.
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _patch_ssd(a, b, ay, ax, by, bx, half, best):
    acc = 0.0
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            for c in range(3):
                d = a[ay + dy, ax + dx, c] - b[by + dy, bx + dx, c]
                acc += d * d
        if acc >= best:
            return acc
    return acc


@njit(cache=True)
def _nn_field(a, b, half, iterations, seed):
    ha, wa = a.shape[0], a.shape[1]
    hb, wb = b.shape[0], b.shape[1]
    ay0, ay1 = half, ha - half
    ax0, ax1 = half, wa - half
    by0, by1 = half, hb - half
    bx0, bx1 = half, wb - half

    off = np.zeros((ha, wa, 2), dtype=np.int32)
    dist = np.zeros((ha, wa), dtype=np.float64)

    state = np.uint64(seed) ^ np.uint64(0xD1B54A32D192ED03)

    for y in range(ay0, ay1):
        for x in range(ax0, ax1):
            state, r1 = _rng_next(state)
            state, r2 = _rng_next(state)
            tx = bx0 + int(r1 % np.uint64(bx1 - bx0))
            ty = by0 + int(r2 % np.uint64(by1 - by0))
            off[y, x, 0] = tx - x
            off[y, x, 1] = ty - y
            dist[y, x] = _patch_ssd(a, b, y, x, ty, tx, half, np.inf)

    rmax = hb if hb > wb else wb
    for it in range(iterations):
        forward = it % 2 == 0
        if forward:
            ys, ye, xs, xe, step = ay0, ay1, ax0, ax1, 1
        else:
            ys, ye, xs, xe, step = ay1 - 1, ay0 - 1, ax1 - 1, ax0 - 1, -1
        for y in range(ys, ye, step):
            for x in range(xs, xe, step):
                best = dist[y, x]
                bdx = off[y, x, 0]
                bdy = off[y, x, 1]

                # Propagate from the two already-scanned neighbors.
                for n in range(2):
                    if n == 0:
                        ny, nx = y, x - step
                        if nx < ax0 or nx >= ax1:
                            continue
                    else:
                        ny, nx = y - step, x
                        if ny < ay0 or ny >= ay1:
                            continue
                    tx = x + off[ny, nx, 0]
                    ty = y + off[ny, nx, 1]
                    if tx < bx0:
                        tx = bx0
                    elif tx >= bx1:
                        tx = bx1 - 1
                    if ty < by0:
                        ty = by0
                    elif ty >= by1:
                        ty = by1 - 1
                    if tx - x == bdx and ty - y == bdy:
                        continue
                    d = _patch_ssd(a, b, y, x, ty, tx, half, best)
                    if d < best:
                        best = d
                        bdx = tx - x
                        bdy = ty - y

                # Random search around the current target.
                rad = rmax
                while rad >= 1:
                    cx = x + bdx
                    cy = y + bdy
                    state, r1 = _rng_next(state)
                    state, r2 = _rng_next(state)
                    span = np.uint64(2 * rad + 1)
                    tx = cx - rad + int(r1 % span)
                    ty = cy - rad + int(r2 % span)
                    if tx < bx0:
                        tx = bx0
                    elif tx >= bx1:
                        tx = bx1 - 1
                    if ty < by0:
                        ty = by0
                    elif ty >= by1:
                        ty = by1 - 1
                    if not (tx - x == bdx and ty - y == bdy):
                        d = _patch_ssd(a, b, y, x, ty, tx, half, best)
                        if d < best:
                            best = d
                            bdx = tx - x
                            bdy = ty - y
                    rad //= 2

                dist[y, x] = best
                off[y, x, 0] = bdx
                off[y, x, 1] = bdy

    return off, dist


def compute_field(img_a, img_b, params=None):
    """Nearest-neighbor offset field from Lab image A into Lab image B.

    Deterministic given ``params.rng_seed``. Margin pixels (where no full
    patch fits) replicate the nearest interior pixel's match, clamped so
    every offset targets B's valid patch domain.

    Raises DimensionError if either image is smaller than one patch.
    """
    if params is None:
        params = CorrParams()
    a = np.ascontiguousarray(img_a, dtype=np.float64)
    b = np.ascontiguousarray(img_b, dtype=np.float64)
    ps = params.patch_size
    half = ps // 2
    for name, img in (("A", a), ("B", b)):
        if img.shape[0] < ps or img.shape[1] < ps:
            raise DimensionError(f"image {name} smaller than patch {ps}x{ps}")

    seed = np.uint64(params.rng_seed % 2**64)
    off, dist = _nn_field(a, b, half, params.iterations, seed)
    _fill_margins(off, dist, a.shape, b.shape, half)
    return CorrespondenceField(
        width=a.shape[1], height=a.shape[0], offset=off, dist=dist
    )


def _fill_margins(off, dist, shape_a, shape_b, half):
    ha, wa = shape_a[0], shape_a[1]
    hb, wb = shape_b[0], shape_b[1]
    yy, xx = np.mgrid[0:ha, 0:wa]
    qy = np.clip(yy, half, ha - half - 1)
    qx = np.clip(xx, half, wa - half - 1)
    margin = (qy != yy) | (qx != xx)
    if not margin.any():
        return
    ty = np.clip(qy + off[qy, qx, 1], half, hb - half - 1)
    tx = np.clip(qx + off[qy, qx, 0], half, wb - half - 1)
    off[margin, 0] = (tx - xx)[margin]
    off[margin, 1] = (ty - yy)[margin]
    dist[margin] = dist[qy, qx][margin]


def _resolve_sigma(field, params):
    if params.sigma_dist is not None:
        return max(params.sigma_dist, _EPS)
    return max(float(np.median(field.dist)), _EPS)


def confidence_map(field, params=None):
    """Confidence in [0, 1] for every pixel of the field."""
    if params is None:
        params = CorrParams()
    sigma = _resolve_sigma(field, params)
    data = np.exp(-field.dist / sigma)

    cr = params.coherence_radius
    h, w = field.height, field.width
    agree = np.zeros((h, w), dtype=np.float64)
    count = np.zeros((h, w), dtype=np.float64)
    off = field.offset
    for dy in range(-cr, cr + 1):
        ys0, ys1 = max(0, -dy), min(h, h - dy)
        for dx in range(-cr, cr + 1):
            xs0, xs1 = max(0, -dx), min(w, w - dx)
            center = off[ys0:ys1, xs0:xs1]
            shifted = off[ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx]
            ok = (np.abs(center - shifted) <= 1).all(axis=2)
            agree[ys0:ys1, xs0:xs1] += ok
            count[ys0:ys1, xs0:xs1] += 1.0
    return data * (agree / count)


def confidence_of(field, p, params=None):
    """Confidence of the match at pixel ``p = (x, y)``."""
    if params is None:
        params = CorrParams()
    x, y = int(p[0]), int(p[1])
    if not (0 <= x < field.width and 0 <= y < field.height):
        raise IndexError(f"pixel {p} out of bounds")
    sigma = _resolve_sigma(field, params)
    data = float(np.exp(-field.dist[y, x] / sigma))

    cr = params.coherence_radius
    y0, y1 = max(0, y - cr), min(field.height, y + cr + 1)
    x0, x1 = max(0, x - cr), min(field.width, x + cr + 1)
    window = field.offset[y0:y1, x0:x1]
    ok = (np.abs(window - field.offset[y, x]) <= 1).all(axis=2)
    return data * float(ok.mean())


def filter_matches(field, mask_a, mask_b, params=None, threshold=0.8,
                   max_matches=5000):
    """Keep matches inside both saliency masks with confidence above the
    threshold.

    If more than ``max_matches`` survive, the best by confidence are
    kept, breaking ties in row-major source-pixel order.
    """
    if params is None:
        params = CorrParams()
    mask_a = np.asarray(mask_a, dtype=bool)
    mask_b = np.asarray(mask_b, dtype=bool)
    conf = confidence_map(field, params)

    yy, xx = np.mgrid[0 : field.height, 0 : field.width]
    tx = xx + field.offset[..., 0]
    ty = yy + field.offset[..., 1]
    keep = mask_a & mask_b[ty, tx] & (conf > threshold)

    ys, xs = np.nonzero(keep)
    confs = conf[ys, xs]
    if len(ys) > max_matches:
        # Stable sort on descending confidence preserves row-major order
        # among ties.
        order = np.argsort(-confs, kind="stable")[:max_matches]
        order = np.sort(order)
        ys, xs, confs = ys[order], xs[order], confs[order]

    pa = np.stack([xs, ys], axis=1).astype(np.int32)
    pb = np.stack([tx[ys, xs], ty[ys, xs]], axis=1).astype(np.int32)
    return MatchSet(points_a=pa, points_b=pb, confidence=confs.astype(np.float64))
