"""Box-seeded foreground extraction by iterated color modeling and
globally optimal graph cuts.

Everything inside the box starts as probable foreground and everything
outside is definite background forever. Each iteration fits one
Gaussian mixture per side in Lab space, converts the mixture
likelihoods into terminal capacities, adds contrast-weighted
8-connected smoothness arcs, and relabels the free pixels by the
minimum cut. The cut step is a global optimum for the current models,
so the tracked energy never increases within an iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import cluster
from .errors import EmptyBoxError, TooFewPixelsError
from .maxflow import FlowNetwork, max_flow

DEFINITE_BG = np.uint8(0)
PROBABLE_BG = np.uint8(1)
PROBABLE_FG = np.uint8(2)

_LIKELIHOOD_FLOOR = 1e-10
_COV_REG = 1e-3
_HARD_CAP = 1e9
_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GrabCutParams:
    gmm_k: int = 5
    gamma: float = 50.0
    max_iters: int = 5
    conv_tol: float = 0.001  # stop when < this fraction of pixels flips
    rng_seed: int = 0

    def __post_init__(self):
        if self.gmm_k < 1:
            raise ValueError("gmm_k must be >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass
class Gmm:
    """Full-covariance Gaussian mixture over Lab colors.

    Covariances are regularized (+1e-3 I) so the determinants stay
    positive even on flat color regions; weights sum to one.
    """

    weights: np.ndarray  # (k,)
    means: np.ndarray  # (k, 3)
    covs: np.ndarray  # (k, 3, 3)

    def __post_init__(self):
        self._inv = np.stack([np.linalg.inv(c) for c in self.covs])
        self._logdet = np.array([np.linalg.slogdet(c)[1] for c in self.covs])

    def pdf(self, pixels):
        """Mixture density at each (N, 3) color."""
        total = np.zeros(len(pixels))
        for c in range(len(self.weights)):
            if self.weights[c] <= 0:
                continue
            diff = pixels - self.means[c]
            q = np.einsum("ij,jk,ik->i", diff, self._inv[c], diff)
            total += self.weights[c] * np.exp(
                -0.5 * (q + self._logdet[c] + 3.0 * _LOG_2PI)
            )
        return total

    def component_loglik(self, pixels):
        """(N, k) weighted per-component log likelihoods (-inf when a
        component is empty)."""
        out = np.full((len(pixels), len(self.weights)), -np.inf)
        for c in range(len(self.weights)):
            if self.weights[c] <= 0:
                continue
            diff = pixels - self.means[c]
            q = np.einsum("ij,jk,ik->i", diff, self._inv[c], diff)
            out[:, c] = np.log(self.weights[c]) - 0.5 * (
                q + self._logdet[c] + 3.0 * _LOG_2PI
            )
        return out


def init_trimap(box, width, height):
    """Probable foreground inside the (inclusive, integer) box, definite
    background outside."""
    x0, y0 = int(box.x_min), int(box.y_min)
    x1, y1 = int(box.x_max), int(box.y_max)
    if x0 > x1 or y0 > y1 or x1 < 0 or y1 < 0 or x0 >= width or y0 >= height:
        raise EmptyBoxError(f"box {box} contains no pixels")
    trimap = np.full((height, width), DEFINITE_BG, dtype=np.uint8)
    trimap[max(y0, 0) : y1 + 1, max(x0, 0) : x1 + 1] = PROBABLE_FG
    return trimap


def fit_gmms(img_lab, fg_mask, k, seed):
    """Fit foreground and background mixtures from the current split.

    Each side is initialized by seeded k-means on its colors, followed
    by one full M-step (means, regularized covariances, weights from
    component populations).
    """
    img = np.asarray(img_lab, dtype=np.float64)
    fg_mask = np.asarray(fg_mask, dtype=bool)
    fg_pixels = img[fg_mask]
    bg_pixels = img[~fg_mask]
    if len(fg_pixels) < k or len(bg_pixels) < k:
        raise TooFewPixelsError(
            f"need >= {k} pixels per side, got fg={len(fg_pixels)} "
            f"bg={len(bg_pixels)}"
        )
    return _fit_side(fg_pixels, k, seed), _fit_side(bg_pixels, k, seed + 1)


def _fit_side(pixels, k, seed):
    result = cluster.kmeans(pixels, k, seed=seed, max_iters=10)
    fallback_covs = np.tile(np.eye(3) * _COV_REG, (k, 1, 1))
    return _m_step(pixels, result.labels, k, result.centers, fallback_covs)


def _m_step(pixels, labels, k, fallback_means, fallback_covs):
    # Empty components keep the fallback parameters with zero weight.
    weights = np.zeros(k)
    means = np.array(fallback_means, dtype=np.float64, copy=True)
    covs = np.array(fallback_covs, dtype=np.float64, copy=True)
    for c in range(k):
        members = pixels[labels == c]
        if len(members) == 0:
            continue
        weights[c] = len(members)
        means[c] = members.mean(axis=0)
        diff = members - means[c]
        covs[c] = diff.T @ diff / len(members) + np.eye(3) * _COV_REG
    weights /= weights.sum()
    return Gmm(weights=weights, means=means, covs=covs)


def _refit(pixels, gmm):
    labels = np.argmax(gmm.component_loglik(pixels), axis=1)
    return _m_step(pixels, labels, len(gmm.weights), gmm.means, gmm.covs)


def _smoothness(img, gamma):
    """Contrast-weighted 8-connected edge lists.

    beta is one over twice the mean squared neighbor color difference;
    a constant image gives beta = 0 so the weights fall back to
    gamma / distance everywhere.
    """
    h, w = img.shape[:2]
    idx = np.arange(h * w).reshape(h, w)
    pairs = []
    sq_sum = 0.0
    sq_n = 0
    for (dy, dx), dist in (
        ((0, 1), 1.0),
        ((1, 0), 1.0),
        ((1, 1), np.sqrt(2.0)),
        ((1, -1), np.sqrt(2.0)),
    ):
        ys = slice(0, h - dy)
        xs = slice(max(0, -dx), min(w, w - dx))
        ys2 = slice(dy, h)
        xs2 = slice(max(0, dx), min(w, w + dx))
        d2 = ((img[ys, xs] - img[ys2, xs2]) ** 2).sum(axis=2).ravel()
        pairs.append((idx[ys, xs].ravel(), idx[ys2, xs2].ravel(), d2, dist))
        sq_sum += d2.sum()
        sq_n += d2.size
    mean_sq = sq_sum / max(sq_n, 1)
    beta = 0.0 if mean_sq <= 0 else 1.0 / (2.0 * mean_sq)
    return [
        (i, j, gamma * np.exp(-beta * d2) / dist) for i, j, d2, dist in pairs
    ]


def build_energy_graph(img_lab, trimap, fg_gmm, bg_gmm, params):
    """One node per pixel. Free pixels pay -log of the opposite side's
    likelihood on their terminal arcs; definite background is pinned to
    the sink with a dominating capacity."""
    img = np.asarray(img_lab, dtype=np.float64)
    h, w = img.shape[:2]
    flat = img.reshape(-1, 3)
    src, snk = _data_terms(flat, trimap.ravel(), fg_gmm, bg_gmm)

    net = FlowNetwork(h * w)
    net.set_terminal(np.arange(h * w), src, snk)
    for i, j, weight in _smoothness(img, params.gamma):
        net.add_edges(i, j, weight, weight)
    return net


def _data_terms(flat, tri_flat, fg_gmm, bg_gmm):
    p_fg = np.maximum(fg_gmm.pdf(flat), _LIKELIHOOD_FLOOR)
    p_bg = np.maximum(bg_gmm.pdf(flat), _LIKELIHOOD_FLOOR)
    src = -np.log(p_bg)  # cost of labeling the pixel background
    snk = -np.log(p_fg)  # cost of labeling the pixel foreground
    hard_bg = tri_flat == DEFINITE_BG
    src[hard_bg] = 0.0
    snk[hard_bg] = _HARD_CAP
    return src, snk


def energy(img_lab, trimap, mask, fg_gmm, bg_gmm, params):
    """Data + smoothness energy of a labeling under the given models."""
    img = np.asarray(img_lab, dtype=np.float64)
    flat = img.reshape(-1, 3)
    src, snk = _data_terms(flat, trimap.ravel(), fg_gmm, bg_gmm)
    m = np.asarray(mask, dtype=bool).ravel()
    total = float(np.where(m, snk, src).sum())
    labels = m
    for i, j, weight in _smoothness(img, params.gamma):
        disagree = labels[i] != labels[j]
        total += float(weight[disagree].sum())
    return total


@dataclass
class GrabCutResult:
    mask: np.ndarray  # (H, W) bool foreground
    degenerate: bool = False
    iterations: int = 0
    # (energy of previous labeling, energy of new labeling), both under
    # the models used for that iteration's cut.
    energies: list = field(default_factory=list)


def run_grabcut(img_lab, box, params=None):
    """Segment one object given its bounding box.

    The mask is false everywhere outside the box. Degenerate inputs
    (constant image, or a box leaving a side without enough pixels to
    model) return the initial box mask flagged degenerate; a foreground
    that collapses to empty returns the empty mask flagged degenerate.
    """
    if params is None:
        params = GrabCutParams()
    img = np.asarray(img_lab, dtype=np.float64)
    h, w = img.shape[:2]
    trimap = init_trimap(box, w, h)
    free = trimap != DEFINITE_BG
    mask = trimap == PROBABLE_FG

    if np.ptp(img.reshape(-1, 3), axis=0).max() == 0.0:
        return GrabCutResult(mask=mask, degenerate=True)
    n_fg = int(mask.sum())
    n_bg = mask.size - n_fg
    if n_fg == 0 or n_bg == 0:
        return GrabCutResult(mask=mask, degenerate=True)
    k = min(params.gmm_k, n_fg, n_bg)

    fg_gmm = bg_gmm = None
    energies = []
    for it in range(params.max_iters):
        if it == 0:
            fg_gmm, bg_gmm = fit_gmms(img, mask, k, params.rng_seed)
        else:
            fg_gmm = _refit(img[mask], fg_gmm)
            bg_gmm = _refit(img[~mask], bg_gmm)

        net = build_energy_graph(img, trimap, fg_gmm, bg_gmm, params)
        before = energy(img, trimap, mask, fg_gmm, bg_gmm, params)
        cut = max_flow(net)
        new_mask = cut.side.reshape(h, w) & free
        after = energy(img, trimap, new_mask, fg_gmm, bg_gmm, params)
        energies.append((before, after))

        changed = float(np.count_nonzero(new_mask != mask)) / mask.size
        mask = new_mask
        if not mask.any():
            return GrabCutResult(
                mask=mask, degenerate=True, iterations=it + 1, energies=energies
            )
        if changed < params.conv_tol:
            return GrabCutResult(
                mask=mask, degenerate=False, iterations=it + 1, energies=energies
            )
    return GrabCutResult(
        mask=mask, degenerate=False, iterations=params.max_iters, energies=energies
    )
