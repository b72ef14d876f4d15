"""Jaccard scoring, a seeded synthetic-scene generator, and batch
evaluation reports.

Scenes provide fully controlled ground truth: a textured background
(low-frequency gradient plus seeded value noise) shifts between frames
by the camera translation; every object is a sprite pasted at its
frame-A position and again at position + camera + object motion, so the
exact rasterized shape is the ground-truth mask. Static props (zero
motion) populate the background so the displacement statistics are
dominated by camera motion, which is what the static/dynamic
factorization assumes.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import image_io
from .errors import DimensionMismatchError, SceneSpecError


def jaccard(est, ref):
    """|intersection| / |union| of two masks; two empty masks agree
    perfectly and score 1.0."""
    est = np.asarray(est, dtype=bool)
    ref = np.asarray(ref, dtype=bool)
    if est.shape != ref.shape:
        raise DimensionMismatchError(f"{est.shape} vs {ref.shape}")
    union = np.count_nonzero(est | ref)
    if union == 0:
        return 1.0
    return np.count_nonzero(est & ref) / union


# ---------------------------------------------------------------------------
# Scene description


@dataclass
class SceneObject:
    shape: str  # "disc" | "rectangle" | "blob"
    color: tuple  # (L, a, b)
    motion: tuple  # (dx, dy) pixels, added on top of the camera shift
    center: tuple  # (x, y) position in frame A
    size: float  # radius / half extent
    aspect: float = 1.0  # rectangles: height = size * aspect


@dataclass
class BackgroundSpec:
    noise_amplitude: float = 18.0
    noise_cell: int = 8
    gradient_amplitude: float = 28.0
    fine_noise: float = 4.0
    base: tuple = (116, 108, 96)


@dataclass
class SceneSpec:
    width: int
    height: int
    camera_motion: tuple  # (dx, dy) global translation between frames
    objects: list  # of SceneObject
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    rng_seed: int = 0

    def to_json(self):
        doc = {
            "width": self.width,
            "height": self.height,
            "camera_motion": list(self.camera_motion),
            "rng_seed": self.rng_seed,
            "background": {
                "noise_amplitude": self.background.noise_amplitude,
                "noise_cell": self.background.noise_cell,
                "gradient_amplitude": self.background.gradient_amplitude,
                "fine_noise": self.background.fine_noise,
                "base": list(self.background.base),
            },
            "objects": [
                {
                    "shape": o.shape,
                    "color": list(o.color),
                    "motion": list(o.motion),
                    "center": list(o.center),
                    "size": o.size,
                    "aspect": o.aspect,
                }
                for o in self.objects
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        bg = BackgroundSpec(**{
            **doc.get("background", {}),
            "base": tuple(doc.get("background", {}).get("base", (116, 108, 96))),
        })
        objects = [
            SceneObject(
                shape=o["shape"],
                color=tuple(o["color"]),
                motion=tuple(o["motion"]),
                center=tuple(o["center"]),
                size=o["size"],
                aspect=o.get("aspect", 1.0),
            )
            for o in doc["objects"]
        ]
        return cls(
            width=doc["width"],
            height=doc["height"],
            camera_motion=tuple(doc["camera_motion"]),
            objects=objects,
            background=bg,
            rng_seed=doc.get("rng_seed", 0),
        )


@dataclass
class Scene:
    img_a: np.ndarray  # (H, W, 3) uint8
    img_b: np.ndarray
    gt_a: list  # ground-truth bool mask per object, frame A
    gt_b: list  # same objects, frame B


# ---------------------------------------------------------------------------
# Rendering


def generate_scene(spec):
    """Render the image pair and exact ground-truth masks.

    Frame B shows the background shifted by the camera motion and each
    object shifted by camera motion + its own motion. Deterministic
    given the seed. Objects must fit inside both frames; an object's
    motion must be either exactly (0, 0) (a static prop) or at least 5
    pixels, otherwise the scene is rejected.
    """
    w, h = spec.width, spec.height
    cdx, cdy = int(spec.camera_motion[0]), int(spec.camera_motion[1])
    rng = np.random.default_rng(spec.rng_seed)

    canvas = _render_background(
        w + abs(cdx), h + abs(cdy), spec.background, rng
    )
    oax, oay = max(cdx, 0), max(cdy, 0)
    img_a = canvas[oay : oay + h, oax : oax + w].copy()
    img_b = canvas[oay - cdy : oay - cdy + h, oax - cdx : oax - cdx + w].copy()

    gt_a, gt_b = [], []
    for obj in spec.objects:
        mdx, mdy = int(obj.motion[0]), int(obj.motion[1])
        mnorm = math.hypot(mdx, mdy)
        if mnorm != 0.0 and mnorm < 5.0:
            raise SceneSpecError(
                f"object motion {obj.motion} is neither zero nor >= 5 px"
            )
        sprite_rgb, alpha = _render_sprite(obj, rng)
        pos_a = (int(obj.center[0]), int(obj.center[1]))
        pos_b = (pos_a[0] + cdx + mdx, pos_a[1] + cdy + mdy)
        mask_a = _paste(img_a, sprite_rgb, alpha, pos_a)
        mask_b = _paste(img_b, sprite_rgb, alpha, pos_b)
        if mdx or mdy:
            gt_a.append(mask_a)
            gt_b.append(mask_b)
    return Scene(img_a=img_a, img_b=img_b, gt_a=gt_a, gt_b=gt_b)


def _render_background(w, h, bg, rng):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    theta = rng.uniform(0, 2 * np.pi)
    grad = (np.cos(theta) * xx / max(w, 1) + np.sin(theta) * yy / max(h, 1))
    img = np.array(bg.base, dtype=np.float64) + grad[..., None] * bg.gradient_amplitude

    cell = max(int(bg.noise_cell), 1)
    gh, gw = h // cell + 2, w // cell + 2
    coarse = rng.uniform(-1, 1, size=(gh, gw, 3))
    fy = yy / cell
    fx = xx / cell
    y0 = fy.astype(int)
    x0 = fx.astype(int)
    ty = (fy - y0)[..., None]
    tx = (fx - x0)[..., None]
    c00 = coarse[y0, x0]
    c01 = coarse[y0, x0 + 1]
    c10 = coarse[y0 + 1, x0]
    c11 = coarse[y0 + 1, x0 + 1]
    smooth = (
        c00 * (1 - ty) * (1 - tx)
        + c01 * (1 - ty) * tx
        + c10 * ty * (1 - tx)
        + c11 * ty * tx
    )
    img += smooth * bg.noise_amplitude
    img += rng.uniform(-bg.fine_noise, bg.fine_noise, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def _render_sprite(obj, rng):
    """Rasterize one object: an alpha mask plus a speckled color patch.

    The speckle keeps interior patches distinctive so correspondence can
    anchor inside the object, and it travels with the sprite because the
    same patch is pasted in both frames.
    """
    r = float(obj.size)
    if obj.shape == "disc":
        half_w = half_h = int(math.ceil(r))
    elif obj.shape == "rectangle":
        half_w = int(math.ceil(r))
        half_h = int(math.ceil(r * obj.aspect))
    elif obj.shape == "blob":
        half_w = half_h = int(math.ceil(r * 1.5))
    else:
        raise SceneSpecError(f"unknown shape {obj.shape!r}")

    yy, xx = np.mgrid[-half_h : half_h + 1, -half_w : half_w + 1].astype(np.float64)
    if obj.shape == "disc":
        alpha = xx**2 + yy**2 <= r**2
    elif obj.shape == "rectangle":
        alpha = (np.abs(xx) <= r) & (np.abs(yy) <= r * obj.aspect)
    else:
        alpha = xx**2 + yy**2 <= (0.8 * r) ** 2
        for _ in range(3):
            ang = rng.uniform(0, 2 * np.pi)
            lx = 0.55 * r * math.cos(ang)
            ly = 0.55 * r * math.sin(ang)
            lobe_r = rng.uniform(0.4, 0.6) * r
            alpha |= (xx - lx) ** 2 + (yy - ly) ** 2 <= lobe_r**2

    base = image_io.lab_to_rgb(np.array(obj.color, dtype=np.float64)[None, None])
    speckle = rng.integers(-10, 11, size=alpha.shape + (3,))
    patch = np.clip(base.astype(np.int64) + speckle, 0, 255).astype(np.uint8)
    return patch, alpha


def _paste(img, sprite, alpha, center):
    h, w = img.shape[:2]
    sh, sw = alpha.shape
    x0 = center[0] - sw // 2
    y0 = center[1] - sh // 2
    if x0 < 0 or y0 < 0 or x0 + sw > w or y0 + sh > h:
        raise SceneSpecError(
            f"object at {center} (sprite {sw}x{sh}) leaves the {w}x{h} frame"
        )
    region = img[y0 : y0 + sh, x0 : x0 + sw]
    region[alpha] = sprite[alpha]
    mask = np.zeros((h, w), dtype=bool)
    mask[y0 : y0 + sh, x0 : x0 + sw] = alpha
    return mask


# ---------------------------------------------------------------------------
# Randomized scene family used by the evaluation suite

_DYNAMIC_LABS = [
    (54.0, 81.0, 70.0),   # strong red
    (60.0, 62.0, -58.0),  # violet
    (67.0, 43.0, 74.0),   # orange
]
_PROP_LABS = [
    (45.0, -40.0, 30.0),  # green
    (40.0, 10.0, -45.0),  # blue
    (62.0, -28.0, -18.0),  # teal
    (52.0, 5.0, 18.0),    # tan
]
_SHAPES = ["disc", "rectangle", "blob"]


def make_random_scene(seed, n_objects=1, width=200, height=140, static=False):
    """Seeded scene family: camera translation of 7..10 px, object motion
    of 15..20 px roughly perpendicular to it (or zero when ``static``),
    plus static props that keep camera motion dominant in the match
    statistics."""
    rng = np.random.default_rng(seed)
    cam_ang = rng.uniform(0, 2 * np.pi)
    cam_mag = rng.uniform(7, 10)
    cam = (round(cam_mag * math.cos(cam_ang)), round(cam_mag * math.sin(cam_ang)))

    objects = []
    taken = []

    def place(size, total_shift, attempts=300):
        margin = int(math.ceil(size * 1.6)) + 2
        for _ in range(attempts):
            x = int(rng.integers(margin, width - margin))
            y = int(rng.integers(margin, height - margin))
            x2, y2 = x + total_shift[0], y + total_shift[1]
            if not (margin <= x2 < width - margin and margin <= y2 < height - margin):
                continue
            good = True
            for (ox, oy, orad) in taken:
                if math.hypot(x - ox, y - oy) < orad + size + 8:
                    good = False
                    break
                if math.hypot(x2 - ox, y2 - oy) < orad + size + 8:
                    good = False
                    break
            if good:
                taken.append((x, y, size))
                taken.append((x2, y2, size))
                return (x, y)
        raise SceneSpecError("could not place all scene objects")

    base_motion_ang = cam_ang + np.pi / 2 + rng.uniform(-0.4, 0.4)
    for i in range(n_objects):
        if static:
            motion = (0, 0)
        else:
            ang = base_motion_ang + rng.uniform(-0.12, 0.12)
            mag = rng.uniform(15, 20)
            motion = (round(mag * math.cos(ang)), round(mag * math.sin(ang)))
            if math.hypot(*motion) < 5:
                motion = (0, 15)
        size = float(rng.uniform(11, 15))
        shape = _SHAPES[int(rng.integers(len(_SHAPES)))]
        color = _DYNAMIC_LABS[i % len(_DYNAMIC_LABS)]
        shift = (cam[0] + motion[0], cam[1] + motion[1])
        center = place(size * (1.5 if shape == "blob" else 1.0), shift)
        objects.append(
            SceneObject(
                shape=shape, color=color, motion=motion, center=center, size=size
            )
        )

    n_props = 5 + int(rng.integers(0, 3))
    for i in range(n_props):
        size = float(rng.uniform(10, 14))
        shape = _SHAPES[int(rng.integers(len(_SHAPES)))]
        color = _PROP_LABS[i % len(_PROP_LABS)]
        try:
            center = place(size * (1.5 if shape == "blob" else 1.0), cam)
        except SceneSpecError:
            break  # crowded frame: fewer props is fine
        objects.append(
            SceneObject(
                shape=shape, color=color, motion=(0, 0), center=center, size=size
            )
        )

    return SceneSpec(
        width=width,
        height=height,
        camera_motion=cam,
        objects=objects,
        rng_seed=int(seed) * 7919 + 13,
    )


# ---------------------------------------------------------------------------
# Scoring


@dataclass
class EvalRow:
    scene: str
    object_id: int
    image1: float
    image2: float


@dataclass
class EvalReport:
    rows: list

    @property
    def scores(self):
        return [s for r in self.rows for s in (r.image1, r.image2)]

    @property
    def mean(self):
        s = self.scores
        return sum(s) / len(s) if s else 0.0

    @property
    def min(self):
        s = self.scores
        return min(s) if s else 0.0

    def to_json(self):
        return json.dumps(
            {
                "rows": [
                    {
                        "scene": r.scene,
                        "object": r.object_id,
                        "image1": round(r.image1, 6),
                        "image2": round(r.image2, 6),
                    }
                    for r in self.rows
                ],
                "mean": round(self.mean, 6),
                "min": round(self.min, 6),
            },
            indent=2,
        )

    def to_text(self):
        lines = [f"{'scene':<14}{'object':>7}{'image 1':>10}{'image 2':>10}"]
        for r in self.rows:
            lines.append(
                f"{r.scene:<14}{r.object_id:>7}{r.image1:>10.3f}{r.image2:>10.3f}"
            )
        lines.append(
            f"{'mean':<14}{'':>7}{self.mean:>10.3f} (min {self.min:.3f})"
        )
        return "\n".join(lines)


def match_masks(est_masks, gt_masks):
    """Greedy assignment of estimated to ground-truth masks by descending
    Jaccard; deterministic tie-break on (gt index, est index). Unmatched
    ground truth scores 0."""
    scores = [0.0] * len(gt_masks)
    if not gt_masks:
        return scores
    pairs = []
    for g, gt in enumerate(gt_masks):
        for e, est in enumerate(est_masks):
            pairs.append((-jaccard(est, gt), g, e))
    pairs.sort()
    used_g, used_e = set(), set()
    for neg, g, e in pairs:
        if g in used_g or e in used_e:
            continue
        used_g.add(g)
        used_e.add(e)
        scores[g] = -neg
    return scores


def evaluate_pair(img_a, img_b, k_objects, gt_a, gt_b, config=None, scene="scene"):
    """Run the full pipeline on a pair and score each ground-truth object
    in each image."""
    from .pipeline import PipelineConfig, run_pipeline

    if config is None:
        config = PipelineConfig()
    if k_objects != config.objects:
        import dataclasses

        config = dataclasses.replace(config, objects=k_objects)
    result = run_pipeline(img_a, img_b, config)
    est_a = [o.mask for o in result.images[0]]
    est_b = [o.mask for o in result.images[1]]
    scores_a = match_masks(est_a, gt_a)
    scores_b = match_masks(est_b, gt_b)
    return [
        EvalRow(scene=scene, object_id=i, image1=scores_a[i], image2=scores_b[i])
        for i in range(len(gt_a))
    ]


def run_eval_suite(n_scenes, seed, config=None, n_objects=1, width=200, height=140):
    """Generate ``n_scenes`` seeded scenes, run the pipeline on each, and
    collect one report row per object per scene."""
    rows = []
    for i in range(n_scenes):
        spec = make_random_scene(
            seed + i, n_objects=n_objects, width=width, height=height
        )
        scene = generate_scene(spec)
        rows.extend(
            evaluate_pair(
                scene.img_a,
                scene.img_b,
                n_objects,
                scene.gt_a,
                scene.gt_b,
                config=config,
                scene=f"synth-{seed + i}",
            )
        )
    return EvalReport(rows=rows)
