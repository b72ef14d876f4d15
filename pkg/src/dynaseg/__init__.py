"""Automatic segmentation of dynamic objects from an image pair.

Given two photos of a scene taken from different positions at different
times, the pipeline localizes the moving objects from saliency-guided
dense correspondences, separates camera motion from object motion by a
rank-1 factorization of the displacement matrix, boxes each object
through convex hulls and minimum-area rectangles, and extracts pixel
masks with box-seeded iterated graph cuts.
"""

from .cluster import Clustering, kmeans
from .correspondence import (
    CorrParams,
    CorrespondenceField,
    MatchSet,
    compute_field,
    confidence_of,
    filter_matches,
)
from .errors import DynasegError
from .evaluation import (
    EvalReport,
    Scene,
    SceneObject,
    SceneSpec,
    evaluate_pair,
    generate_scene,
    jaccard,
    make_random_scene,
    run_eval_suite,
)
from .geometry import AABB, OrientedRect, Polygon, axis_align, convex_hull, min_area_rect, pad_and_clip
from .grabcut import GrabCutParams, Gmm, init_trimap, run_grabcut
from .image_io import lab_to_rgb, load_image, load_mask, rgb_to_lab, save_image, save_mask
from .maxflow import CutResult, FlowNetwork, cut_capacity, max_flow
from .motion import (
    DynamicPoints,
    MotionMatrix,
    Svd2,
    build_motion_matrix,
    prune_outliers,
    split_static_dynamic,
    svd2,
)
from .pipeline import ObjectResult, PipelineConfig, PipelineResult, run_pipeline
from .saliency import SaliencyParams, compute_saliency, saliency_mask

__version__ = "0.1.0"

__all__ = [
    "AABB",
    "Clustering",
    "CorrParams",
    "CorrespondenceField",
    "CutResult",
    "DynamicPoints",
    "DynasegError",
    "EvalReport",
    "FlowNetwork",
    "Gmm",
    "GrabCutParams",
    "MatchSet",
    "MotionMatrix",
    "ObjectResult",
    "OrientedRect",
    "PipelineConfig",
    "PipelineResult",
    "Polygon",
    "SaliencyParams",
    "Scene",
    "SceneObject",
    "SceneSpec",
    "Svd2",
    "axis_align",
    "build_motion_matrix",
    "compute_field",
    "compute_saliency",
    "confidence_of",
    "convex_hull",
    "cut_capacity",
    "evaluate_pair",
    "filter_matches",
    "generate_scene",
    "init_trimap",
    "jaccard",
    "kmeans",
    "lab_to_rgb",
    "load_image",
    "load_mask",
    "make_random_scene",
    "max_flow",
    "min_area_rect",
    "pad_and_clip",
    "prune_outliers",
    "rgb_to_lab",
    "run_eval_suite",
    "run_grabcut",
    "run_pipeline",
    "save_image",
    "save_mask",
    "saliency_mask",
    "split_static_dynamic",
    "svd2",
]
