"""Command-line front end.

Subcommands:

* ``run``   segment the dynamic objects of an image pair
* ``eval``  score the pipeline on seeded synthetic scenes
* ``synth`` materialize a synthetic scene description to images + masks

Exit codes: 0 success (a static scene is a success), 1 usage error,
2 I/O error, 3 pipeline error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import evaluation, image_io
from .errors import DynasegError, FormatError, IoError, StageError
from .pipeline import PipelineConfig, run_pipeline

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PIPELINE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    parser = _Parser(prog="dynaseg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="segment the dynamic objects of a pair")
    run_p.add_argument("img1")
    run_p.add_argument("img2")
    run_p.add_argument("--objects", type=int, default=None, help="object count K")
    run_p.add_argument("--seed", type=int, default=None, help="master RNG seed")
    run_p.add_argument("--pad", type=float, default=None, help="box padding fraction")
    run_p.add_argument("--conf", type=float, default=None, help="match confidence threshold")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--config", default=None, help="key=value config file")
    run_p.add_argument("--debug", action="store_true", help="write stage overlays")

    eval_p = sub.add_parser("eval", help="score the pipeline on synthetic scenes")
    eval_p.add_argument("--scenes", type=int, default=20)
    eval_p.add_argument("--seed", type=int, default=0)
    eval_p.add_argument("--objects", type=int, default=1)
    eval_p.add_argument("--out", default="out")

    synth_p = sub.add_parser("synth", help="render a scene description")
    synth_p.add_argument("--spec", required=True, help="scene JSON file")
    synth_p.add_argument("--out", default="out")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_synth(args)
    except (IoError, FormatError) as exc:
        print(f"dynaseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"dynaseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except (StageError, DynasegError, ValueError) as exc:
        print(f"dynaseg: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


def _cmd_run(args):
    config = (
        PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    )
    config = config.with_overrides(
        {
            "objects": args.objects,
            "rng_seed": args.seed,
            "pad_frac": args.pad,
            "conf_threshold": args.conf,
            "output_dir": args.out,
        }
    )
    img_a = image_io.load_image(args.img1)
    img_b = image_io.load_image(args.img2)

    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    result = run_pipeline(img_a, img_b, config, collect_debug=args.debug)

    doc = {
        "images": [],
        "static": result.static,
        "reason": result.reason,
        "timing_ms": {k: round(v, 3) for k, v in result.timing_ms.items()},
        "config": {k: str(v) for k, v in config.to_flat().items()},
    }
    for i, (path, objects) in enumerate(
        zip((args.img1, args.img2), result.images), start=1
    ):
        entry = {"path": path, "objects": []}
        for obj in objects:
            mask_name = f"mask_img{i}_obj{obj.object_id}.png"
            image_io.save_mask(obj.mask, os.path.join(out_dir, mask_name))
            entry["objects"].append(
                {
                    "id": obj.object_id,
                    "aabb": {
                        "x_min": int(obj.aabb.x_min),
                        "y_min": int(obj.aabb.y_min),
                        "x_max": int(obj.aabb.x_max),
                        "y_max": int(obj.aabb.y_max),
                    },
                    "mask": mask_name,
                }
            )
        doc["images"].append(entry)

    if args.debug and result.debug is not None:
        _write_debug(out_dir, (img_a, img_b), result)

    with open(os.path.join(out_dir, "result.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    if result.static:
        print(f"static scene: {result.reason}")
    else:
        print(
            f"segmented {len(result.images[0])} object(s) per image -> {out_dir}/"
        )
    return EXIT_OK


def _cmd_eval(args):
    os.makedirs(args.out, exist_ok=True)
    report = evaluation.run_eval_suite(
        args.scenes, args.seed, n_objects=args.objects
    )
    with open(os.path.join(args.out, "report.json"), "w") as fh:
        fh.write(report.to_json())
    with open(os.path.join(args.out, "report.txt"), "w") as fh:
        fh.write(report.to_text() + "\n")
    print(report.to_text())
    return EXIT_OK


def _cmd_synth(args):
    try:
        with open(args.spec) as fh:
            spec = evaluation.SceneSpec.from_json(fh.read())
    except FileNotFoundError as exc:
        raise IoError(f"cannot read scene spec: {args.spec}") from exc
    except (json.JSONDecodeError, KeyError) as exc:
        raise DynasegError(f"bad scene spec: {exc}") from exc

    scene = evaluation.generate_scene(spec)
    os.makedirs(args.out, exist_ok=True)
    image_io.save_image(scene.img_a, os.path.join(args.out, "img1.png"))
    image_io.save_image(scene.img_b, os.path.join(args.out, "img2.png"))
    for i, masks in enumerate((scene.gt_a, scene.gt_b), start=1):
        for j, mask in enumerate(masks):
            image_io.save_mask(
                mask, os.path.join(args.out, f"gt_img{i}_obj{j}.png")
            )
    with open(os.path.join(args.out, "scene.json"), "w") as fh:
        fh.write(spec.to_json())
    print(
        f"rendered {spec.width}x{spec.height} pair with "
        f"{len(scene.gt_a)} dynamic object(s) -> {args.out}/"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Debug overlays


def _write_debug(out_dir, rgb_pair, result):
    dbg = result.debug
    image_io.save_gray(dbg["saliency_a"], os.path.join(out_dir, "saliency_img1.png"))
    image_io.save_gray(dbg["saliency_b"], os.path.join(out_dir, "saliency_img2.png"))

    matches = dbg.get("matches")
    dyn = dbg.get("dynamic_indices")
    for i, img in enumerate(rgb_pair, start=1):
        overlay = img.copy()
        if matches is not None and len(matches):
            pts = matches.points_a if i == 1 else matches.points_b
            _draw_points(overlay, pts, (255, 220, 0))
            if dyn is not None and len(dyn):
                _draw_points(overlay, pts[dyn], (255, 0, 0))
        for boxes in dbg.get("boxes", []):
            _draw_box(overlay, boxes[i - 1], (0, 255, 0))
        image_io.save_image(overlay, os.path.join(out_dir, f"overlay_img{i}.png"))


def _draw_points(img, pts, color):
    h, w = img.shape[:2]
    for x, y in np.asarray(pts, dtype=int):
        if 0 <= x < w and 0 <= y < h:
            img[max(y - 1, 0) : y + 2, max(x - 1, 0) : x + 2] = color


def _draw_box(img, box, color):
    x0, y0 = int(box.x_min), int(box.y_min)
    x1, y1 = int(box.x_max), int(box.y_max)
    img[y0, x0 : x1 + 1] = color
    img[y1, x0 : x1 + 1] = color
    img[y0 : y1 + 1, x0] = color
    img[y0 : y1 + 1, x1] = color


if __name__ == "__main__":
    sys.exit(main())
