"""Command line entry points.

Subcommands:
    gen      generate a dataset directory
    eval     evaluate the built-in oracle (optionally with noise)
    empty    sequentially empty freshly generated piles
    perturb  robustness probes (annotation holes, thick logs)
    viz      render a pile and its grasp maps to PNG files
    stats    summarize a dataset manifest

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import constants as C
from .kernels import derive_seed

log = logging.getLogger("grasplog")


def _seed_default():
    env = os.environ.get("GRASPLOG_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise SystemExit(1)


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: GRASPLOG_SEED or 0)")


def _resolve_seed(args):
    return args.seed if args.seed is not None else _seed_default()


def cmd_gen(args):
    from .dataset import generate_dataset
    manifest = generate_dataset(
        args.out, n_piles=args.piles, logs_per_pile=args.logs,
        seed=_resolve_seed(args), resolution=args.resolution,
        max_subset_size=args.max_subset, threads=args.threads)
    log.info("wrote %d piles, %d samples to %s",
             len(manifest["piles"]), len(manifest["samples"]), args.out)
    return 0


def cmd_eval(args):
    from .harness import NoisyOracle, Oracle, evaluate, format_reports
    from .scene import generate_pile
    seed = _resolve_seed(args)
    piles = [generate_pile(args.logs, derive_seed(seed, 101, i))
             for i in range(args.piles)]
    predictor = NoisyOracle(args.sigma) if args.sigma else Oracle()
    reports = evaluate(predictor, piles, resolution=args.resolution,
                       q_min=args.q_min)
    print(format_reports(reports))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
    return 0


def cmd_empty(args):
    from .harness import empty_pile
    from .scene import generate_pile
    seed = _resolve_seed(args)
    emptied = 0
    for i in range(args.piles):
        pile = generate_pile(args.logs, derive_seed(seed, 101, i))
        rounds, remaining = empty_pile(pile, quality=args.quality,
                                       resolution=args.resolution)
        ok = not remaining.logs
        emptied += ok
        print(f"pile {i}: {'emptied' if ok else 'stuck'} after "
              f"{len(rounds)} grasps ({len(remaining.logs)} left)")
    print(f"emptied {emptied}/{args.piles}")
    return 0


def cmd_perturb(args):
    from .harness import perturbation_suite
    report = perturbation_suite(n_piles=args.piles, logs_per_pile=args.logs,
                                seed=_resolve_seed(args),
                                resolution=args.resolution)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _colormap(values, lo, hi):
    """Map values in [lo, hi] to a blue-white-red ramp as uint8 RGB."""
    t = np.clip((np.asarray(values, dtype=np.float64) - lo) / (hi - lo), 0, 1)
    r = np.where(t < 0.5, 2 * t, 1.0)
    b = np.where(t < 0.5, 1.0, 2 * (1 - t))
    g = 1.0 - np.abs(2 * t - 1.0)
    return (np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)


def cmd_viz(args):
    from PIL import Image, ImageDraw

    from .graspmap import QualityParams, select_best
    from .harness import Oracle
    from .planner import capture_rect
    from .render import ImageGrid, render
    from .scene import generate_pile

    pile = generate_pile(args.logs, _resolve_seed(args))
    grid = ImageGrid(args.resolution)
    rgbd, masks = render(pile, grid)
    os.makedirs(args.out, exist_ok=True)

    def save(name, arr):
        Image.fromarray(arr).save(os.path.join(args.out, name))

    save("rgb.png", (np.clip(rgbd.rgb, 0, 1) * 255).astype(np.uint8))
    save("depth.png", _colormap(rgbd.depth, rgbd.depth.min(),
                                rgbd.depth.max()))
    owner = np.zeros(rgbd.depth.shape)
    for i, m in enumerate(masks.masks):
        owner[m > 0] = i + 1
    save("masks.png", _colormap(owner, 0, max(1, len(masks.ids))))

    target = frozenset(pile.log_ids)
    gm = Oracle().predict(pile, target, grid)
    save("map_c.png", _colormap(gm.c, -1, 1))
    save("map_s.png", _colormap(gm.s, -1, 1))
    save("map_w.png", _colormap(gm.w, C.W_MIN, C.W_MAX))
    save("map_u.png", _colormap(gm.u, 0, 1))
    save("map_b.png", _colormap(gm.b, 0, 1))

    sel = select_best(gm, len(target), QualityParams(kind="f2"), grid)
    img = Image.fromarray((np.clip(rgbd.rgb, 0, 1) * 255).astype(np.uint8))
    if sel is not None:
        draw = ImageDraw.Draw(img)
        rect = capture_rect(sel.grasp)
        px = [grid.xy_to_pixel(x, y) for x, y in rect.corners()]
        draw.polygon([(k, j) for j, k in px], outline=(255, 255, 0))
        ca, cb = px[0], px[1]
        cd, cc = px[3], px[2]
        draw.line([(ca[1], ca[0]), (cb[1], cb[0])], fill=(255, 0, 0), width=2)
        draw.line([(cd[1], cd[0]), (cc[1], cc[0])], fill=(255, 0, 0), width=2)
    img.save(os.path.join(args.out, "best_grasp.png"))
    log.info("wrote 9 images to %s", args.out)
    return 0


def cmd_stats(args):
    from .dataset import load_manifest
    manifest = load_manifest(args.root)
    samples = manifest["samples"]
    by_split = {}
    annotated = 0
    grasps = 0
    for rec in samples:
        by_split[rec["split"]] = by_split.get(rec["split"], 0) + 1
        annotated += rec["n_grasps"] > 0
        grasps += rec["n_grasps"]
    print(f"piles:    {len(manifest['piles'])}")
    print(f"samples:  {len(samples)} ({annotated} with grasps)")
    print(f"grasps:   {grasps}")
    print(f"splits:   " + ", ".join(f"{k}={v}"
                                    for k, v in sorted(by_split.items())))
    print(f"resolution: {manifest['resolution']}, seed: {manifest['seed']}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="grasplog",
        description="Synthetic log-pile scenes with verified grasp maps.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--piles", type=int, default=40)
    p.add_argument("--logs", type=int, default=4)
    p.add_argument("--resolution", type=int, default=C.DEFAULT_RESOLUTION)
    p.add_argument("--max-subset", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    _add_seed(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="evaluate the oracle")
    p.add_argument("--piles", type=int, default=50)
    p.add_argument("--logs", type=int, default=4)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--resolution", type=int, default=C.DEFAULT_RESOLUTION)
    p.add_argument("--q-min", type=float, default=C.Q_MIN_DEFAULT)
    p.add_argument("--json", default=None, help="also write a JSON report")
    _add_seed(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("empty", help="sequentially empty piles")
    p.add_argument("--piles", type=int, default=10)
    p.add_argument("--logs", type=int, default=7)
    p.add_argument("--quality", choices=("f1", "f2", "f3"), default="f2")
    p.add_argument("--resolution", type=int, default=C.DEFAULT_RESOLUTION)
    _add_seed(p)
    p.set_defaults(func=cmd_empty)

    p = sub.add_parser("perturb", help="robustness probes")
    p.add_argument("--piles", type=int, default=10)
    p.add_argument("--logs", type=int, default=4)
    p.add_argument("--resolution", type=int, default=C.DEFAULT_RESOLUTION)
    _add_seed(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("viz", help="render a pile to PNGs")
    p.add_argument("--out", required=True)
    p.add_argument("--logs", type=int, default=4)
    p.add_argument("--resolution", type=int, default=C.DEFAULT_RESOLUTION)
    _add_seed(p)
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("stats", help="summarize a dataset")
    p.add_argument("root")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        log.error("I/O error: %s", exc)
        return 2
    except (ValueError, RuntimeError, KeyError) as exc:
        log.error("invariant violation: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
