"""End-to-end orchestration: saliency -> correspondence -> motion
factorization -> clustering -> boxes -> segmentation.

Dynamic interest points are clustered once on their image-A coordinates
and the cluster labels transfer to the image-B endpoints through the
match pairing, so each object keeps one identity across both images.
Every cluster then gets its own convex hull, minimum-area rectangle,
axis-aligned padded box, and box-seeded segmentation per image.

A pair with no detected dynamic points is a successful "static scene"
result with zero masks, not an error.
"""

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from . import cluster, correspondence, geometry, grabcut, image_io, motion, saliency
from .errors import DynasegError, StageError


@dataclass
class PipelineConfig:
    objects: int = 1  # expected number of dynamic objects (prior knowledge)
    conf_threshold: float = 0.8
    pad_frac: float = 0.10
    max_matches: int = 5000
    rng_seed: int = 0
    # The center prior is disabled on the default path; the factorization
    # assumes saliency masks are driven by distinctness alone.
    saliency: saliency.SaliencyParams = field(
        default_factory=lambda: saliency.SaliencyParams(center_prior_weight=0.0)
    )
    corr: correspondence.CorrParams = field(
        default_factory=correspondence.CorrParams
    )
    grabcut: grabcut.GrabCutParams = field(default_factory=grabcut.GrabCutParams)
    output_dir: str = "out"

    def __post_init__(self):
        if self.objects < 1:
            raise ValueError("objects must be >= 1")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ValueError("conf_threshold must be in [0, 1]")
        if self.pad_frac < 0.0:
            raise ValueError("pad_frac must be >= 0")
        if self.max_matches < 1:
            raise ValueError("max_matches must be >= 1")

    # -- flat key=value serialization ------------------------------------

    _FLAT_FIELDS = {
        "objects": int,
        "conf_threshold": float,
        "pad_frac": float,
        "max_matches": int,
        "rng_seed": int,
        "output_dir": str,
        "saliency.patch_size": int,
        "saliency.stride": int,
        "saliency.center_prior_weight": float,
        "corr.patch_size": int,
        "corr.iterations": int,
        "corr.coherence_radius": int,
        "corr.sigma_dist": float,
        "grabcut.gmm_k": int,
        "grabcut.gamma": float,
        "grabcut.max_iters": int,
        "grabcut.conv_tol": float,
    }

    def to_flat(self):
        out = {}
        for key in self._FLAT_FIELDS:
            obj = self
            *parents, leaf = key.split(".")
            for p in parents:
                obj = getattr(obj, p)
            value = getattr(obj, leaf)
            if value is not None:
                out[key] = value
        return out

    def to_file(self, path):
        with open(path, "w") as fh:
            for key, value in self.to_flat().items():
                fh.write(f"{key}={value}\n")

    @classmethod
    def from_file(cls, path):
        overrides = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, raw = line.partition("=")
                overrides[key.strip()] = raw.strip()
        return cls().with_overrides(overrides)

    def with_overrides(self, overrides):
        cfg = dataclasses.replace(
            self,
            saliency=dataclasses.replace(self.saliency),
            corr=dataclasses.replace(self.corr),
            grabcut=dataclasses.replace(self.grabcut),
        )
        for key, raw in overrides.items():
            if raw is None:
                continue
            if key not in self._FLAT_FIELDS:
                raise ValueError(f"unknown config key: {key}")
            conv = self._FLAT_FIELDS[key]
            value = conv(raw)
            obj = cfg
            *parents, leaf = key.split(".")
            for p in parents:
                obj = getattr(obj, p)
            setattr(obj, leaf, value)
        return cfg


@dataclass
class ObjectResult:
    object_id: int
    aabb: geometry.AABB  # integer pixel box that seeded the segmentation
    mask: np.ndarray  # (H, W) bool


@dataclass
class PipelineResult:
    images: list  # [list[ObjectResult] for image 1, same for image 2]
    static: bool
    reason: str | None
    timing_ms: dict
    debug: dict | None = None

    @property
    def masks(self):
        return [[o.mask for o in objs] for objs in self.images]


def _derive_seed(seed, salt):
    return (seed * 0x9E3779B97F4A7C15 + salt) % 2**63


def run_pipeline(img_a, img_b, config=None, collect_debug=False):
    """Segment every dynamic object of an RGB image pair.

    Returns one mask and box per object per image, or a static-scene
    result when no dynamic motion is found. Deterministic given
    ``config.rng_seed``, which also drives every stage's internal seed.
    Stage failures re-raise as StageError with the stage name.
    """
    if config is None:
        config = PipelineConfig()
    timing = {}
    debug = {} if collect_debug else None

    def stage(name, fn):
        start = time.perf_counter()
        try:
            out = fn()
        except DynasegError as exc:
            raise StageError(name, exc) from exc
        timing[name] = (time.perf_counter() - start) * 1000.0
        return out

    total_start = time.perf_counter()

    lab_a, lab_b = stage(
        "convert", lambda: (image_io.rgb_to_lab(img_a), image_io.rgb_to_lab(img_b))
    )
    h, w = lab_a.shape[:2]

    def _saliency():
        map_a = saliency.compute_saliency(lab_a, config.saliency)
        map_b = saliency.compute_saliency(lab_b, config.saliency)
        return map_a, map_b, saliency.saliency_mask(map_a), saliency.saliency_mask(map_b)

    map_a, map_b, mask_a, mask_b = stage("saliency", _saliency)
    if debug is not None:
        debug["saliency_a"], debug["saliency_b"] = map_a, map_b
        debug["saliency_mask_a"], debug["saliency_mask_b"] = mask_a, mask_b

    corr_params = dataclasses.replace(
        config.corr, rng_seed=_derive_seed(config.rng_seed, 1)
    )
    fld = stage(
        "correspondence",
        lambda: correspondence.compute_field(lab_a, lab_b, corr_params),
    )

    matches = stage(
        "matching",
        lambda: correspondence.filter_matches(
            fld,
            mask_a,
            mask_b,
            corr_params,
            threshold=config.conf_threshold,
            max_matches=config.max_matches,
        ),
    )
    if debug is not None:
        debug["matches"] = matches

    if len(matches) < 3:
        timing["total"] = (time.perf_counter() - total_start) * 1000.0
        return PipelineResult(
            images=[[], []],
            static=True,
            reason="static scene (too few confident matches)",
            timing_ms=timing,
            debug=debug,
        )

    def _motion():
        mm = motion.build_motion_matrix(matches)
        dyn = motion.split_static_dynamic(mm)
        if len(dyn.indices) > 0:
            dyn = motion.prune_outliers(mm, dyn)
        return mm, dyn

    mm, dyn = stage("motion", _motion)
    if debug is not None:
        debug["dynamic_indices"] = dyn.indices

    if len(dyn.indices) == 0:
        timing["total"] = (time.perf_counter() - total_start) * 1000.0
        return PipelineResult(
            images=[[], []],
            static=True,
            reason="static scene (camera motion only)",
            timing_ms=timing,
            debug=debug,
        )

    pts_a = mm.points_a[dyn.indices]
    pts_b = mm.points_b[dyn.indices]

    def _cluster():
        k = min(config.objects, len(pts_a))
        return cluster.kmeans(pts_a, k, seed=_derive_seed(config.rng_seed, 2))

    grouping = stage("cluster", _cluster)
    k_eff = len(grouping.centers)

    def _boxes():
        out = []
        for c in range(k_eff):
            members = grouping.labels == c
            boxes = []
            hulls = []
            for pts in (pts_a[members], pts_b[members]):
                hull = geometry.convex_hull(pts)
                hulls.append(hull)
                if hull.degenerate:
                    raw = geometry.points_aabb(pts)
                else:
                    raw = geometry.axis_align(geometry.min_area_rect(hull))
                boxes.append(geometry.pad_and_clip(raw, config.pad_frac, w, h))
            out.append((boxes, hulls))
        return out

    per_cluster = stage("geometry", _boxes)
    if debug is not None:
        debug["hulls"] = [hulls for _, hulls in per_cluster]
        debug["boxes"] = [boxes for boxes, _ in per_cluster]

    def _segment():
        images = [[], []]
        for c, (boxes, _) in enumerate(per_cluster):
            for i, lab in enumerate((lab_a, lab_b)):
                params = dataclasses.replace(
                    config.grabcut,
                    rng_seed=_derive_seed(config.rng_seed, 100 + 2 * c + i),
                )
                res = grabcut.run_grabcut(lab, boxes[i], params)
                images[i].append(
                    ObjectResult(object_id=c, aabb=boxes[i], mask=res.mask)
                )
        return images

    images = stage("grabcut", _segment)
    timing["total"] = (time.perf_counter() - total_start) * 1000.0
    return PipelineResult(
        images=images, static=False, reason=None, timing_ms=timing, debug=debug
    )
