"""Dataset generation and on-disk layout.

A dataset is a directory tree:

    manifest.json
    losses_golden.json
    piles/<pile_id>/pile.json        scene description
    piles/<pile_id>/rgbd.gmt         (4, N, N) float32, RGB in [0,1] + depth
    piles/<pile_id>/masks.gmt        (L, N, N) uint8 instance masks
    samples/<pile_id>_<subset>/input.gmt    (5, N, N) float32 rgbd + target mask
    samples/<pile_id>_<subset>/target.gmt   (5, N, N) float32 grasp map
    samples/<pile_id>_<subset>/grasps.json  verified grasps with outcomes

Tensors use a small self-describing binary format (magic ``GMT1``) so that
consumers need no Python dependency on this package.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import constants as C
from . import losses
from .graspmap import encode
from .kernels import derive_seed
from .planner import generate_candidates, reduce_candidates
from .render import ImageGrid, make_target_mask, render
from .scene import Pile, generate_pile, save_pile

_MAGIC = b"GMT1"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("u1")}
_DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("u1"): 1}


def write_tensor(path: str, array: np.ndarray) -> None:
    """Write an array as magic, dtype code, ndim, u32 dims, raw LE payload."""
    array = np.ascontiguousarray(array)
    if array.dtype == np.float64 or array.dtype == np.float32:
        array = array.astype("<f4")
    elif array.dtype == np.uint8 or array.dtype == np.bool_:
        array = array.astype("u1")
    code = _DTYPE_CODES.get(array.dtype)
    if code is None:
        raise ValueError(f"unsupported tensor dtype {array.dtype}")
    header = _MAGIC + struct.pack("<BB", code, array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(array.tobytes())
    os.replace(tmp, path)


def read_tensor(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError(f"{path}: bad tensor magic")
    code, ndim = struct.unpack_from("<BB", data, 4)
    if code not in _DTYPES:
        raise ValueError(f"{path}: unknown dtype code {code}")
    dims = struct.unpack_from(f"<{ndim}I", data, 6)
    offset = 6 + 4 * ndim
    arr = np.frombuffer(data, dtype=_DTYPES[code], offset=offset)
    expected = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    if arr.size != expected:
        raise ValueError(f"{path}: payload size mismatch")
    return arr.reshape(dims).copy()


def enumerate_subsets(log_ids, max_size=None):
    """Non-empty subsets sorted by size then lexicographically."""
    ids = sorted(log_ids)
    out = []

    def rec(start, chosen):
        if chosen:
            out.append(tuple(chosen))
        if max_size is not None and len(chosen) >= max_size:
            return
        for i in range(start, len(ids)):
            chosen.append(ids[i])
            rec(i + 1, chosen)
            chosen.pop()

    rec(0, [])
    out.sort(key=lambda s: (len(s), s))
    return out


def subset_tag(subset) -> str:
    return "-".join(str(i) for i in sorted(subset))


@dataclass(frozen=True)
class SampleRecord:
    pile_id: str
    subset: tuple
    sample_id: str
    n_grasps: int
    split: str


def build_sample(pile: Pile, subset, rgbd, masks, grid: ImageGrid):
    """Plan, verify and encode grasps for one target subset.

    Returns (input stack (5,N,N), grasp map, list of grasp dicts).
    """
    target = frozenset(subset)
    candidates = generate_candidates(pile, target)
    kept = reduce_candidates(candidates, pile, target)
    annotated = []
    records = []
    for grasp, result in kept:
        annotated.append((grasp, result.b))
        records.append({
            "x": round(grasp.x, 6), "y": round(grasp.y, 6),
            "phi": round(grasp.phi, 6), "w": round(grasp.w, 6),
            "tau": grasp.tau, "b": round(result.b, 6),
            "beta": round(result.beta, 6),
        })
    gm = encode(annotated, grid)
    tmask = make_target_mask(masks, target)
    rgb = np.asarray(rgbd.rgb, dtype=np.float32)
    stack = np.concatenate([
        np.moveaxis(rgb, 2, 0),
        rgbd.depth[None, :, :].astype(np.float32),
        tmask[None, :, :].astype(np.float32),
    ])
    return stack, gm, records


def augment(input_stack: np.ndarray, gm_stack: np.ndarray, op: str):
    """Apply a symmetry op to both stacks, fixing up angle channels.

    Ops: rot90, rot180, rot270, flip_h (left-right), flip_v (up-down).
    Rotating the scene by 90 deg maps the doubled-angle pair (C, S) to
    (-C, -S); 180 deg leaves it unchanged; mirror flips negate S only.
    """
    def xform(a):
        if op == "rot90":
            return np.rot90(a, 1, axes=(-2, -1)).copy()
        if op == "rot180":
            return np.rot90(a, 2, axes=(-2, -1)).copy()
        if op == "rot270":
            return np.rot90(a, 3, axes=(-2, -1)).copy()
        if op == "flip_h":
            return a[..., :, ::-1].copy()
        if op == "flip_v":
            return a[..., ::-1, :].copy()
        raise ValueError(f"unknown augmentation {op!r}")

    inp = xform(np.asarray(input_stack))
    gm = xform(np.asarray(gm_stack))
    if op in ("rot90", "rot270"):
        gm[0] = -gm[0]
        gm[1] = -gm[1]
    elif op in ("flip_h", "flip_v"):
        gm[1] = -gm[1]
    return inp, gm


def _split_for(pile_index: int, n_piles: int, val_frac: float, test_frac: float) -> str:
    n_test = int(round(n_piles * test_frac))
    n_val = int(round(n_piles * val_frac))
    if pile_index >= n_piles - n_test:
        return "test"
    if pile_index >= n_piles - n_test - n_val:
        return "val"
    return "train"


def _generate_one(args):
    (root, pile_index, pile_seed, n_logs, resolution,
     max_subset_size, split) = args
    pile = generate_pile(n_logs, pile_seed)
    pile_id = f"pile{pile_index:04d}"
    grid = ImageGrid(resolution)
    rgbd, masks = render(pile, grid)

    pdir = os.path.join(root, "piles", pile_id)
    os.makedirs(pdir, exist_ok=True)
    save_pile(pile, os.path.join(pdir, "pile.json"))
    rgb = np.moveaxis(np.asarray(rgbd.rgb, dtype=np.float32), 2, 0)
    write_tensor(os.path.join(pdir, "rgbd.gmt"),
                 np.concatenate([rgb, rgbd.depth[None].astype(np.float32)]))
    write_tensor(os.path.join(pdir, "masks.gmt"), masks.masks)

    records = []
    for subset in enumerate_subsets(pile.log_ids, max_subset_size):
        stack, gm, grasps = build_sample(pile, subset, rgbd, masks, grid)
        sample_id = f"{pile_id}_{subset_tag(subset)}"
        sdir = os.path.join(root, "samples", sample_id)
        os.makedirs(sdir, exist_ok=True)
        write_tensor(os.path.join(sdir, "input.gmt"), stack)
        write_tensor(os.path.join(sdir, "target.gmt"), gm.stack())
        gpath = os.path.join(sdir, "grasps.json")
        tmp = gpath + ".tmp"
        with open(tmp, "w") as fh:
            json.dump({"sample_id": sample_id, "tau": len(subset),
                       "grasps": grasps}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, gpath)
        records.append({
            "pile_id": pile_id,
            "subset": list(subset),
            "sample_id": sample_id,
            "n_grasps": len(grasps),
            "split": split,
        })
    return pile_index, pile_id, pile_seed, n_logs, records


def generate_dataset(root: str, n_piles: int, logs_per_pile: int, seed: int,
                     resolution: int = C.DEFAULT_RESOLUTION,
                     max_subset_size=None, threads: int = 1,
                     val_frac: float = 0.1, test_frac: float = 0.1) -> dict:
    """Generate piles, samples and the manifest under ``root``.

    Each pile derives its own seed from the master seed, so the output is
    byte-identical regardless of ``threads``. Splits are assigned per pile
    so no scene leaks across train/val/test.
    """
    if n_piles < 1:
        raise ValueError("need at least one pile")
    os.makedirs(root, exist_ok=True)
    jobs = []
    for i in range(n_piles):
        pile_seed = derive_seed(seed, 101, i)
        split = _split_for(i, n_piles, val_frac, test_frac)
        jobs.append((root, i, pile_seed, logs_per_pile, resolution,
                     max_subset_size, split))

    if threads <= 1:
        results = [_generate_one(j) for j in jobs]
    else:
        with multiprocessing.Pool(threads) as pool:
            results = pool.map(_generate_one, jobs)
    results.sort(key=lambda r: r[0])

    piles = []
    samples = []
    for _, pile_id, pile_seed, n_logs, records in results:
        piles.append({"pile_id": pile_id, "seed": pile_seed,
                      "n_logs": n_logs})
        samples.extend(records)

    losses.write_golden(os.path.join(root, "losses_golden.json"))

    manifest = {
        "schema": C.DATASET_SCHEMA,
        "seed": seed,
        "resolution": resolution,
        "extent": C.EXTENT,
        "channel_order": list("CSWUB"),
        "constants": C.constants_block(),
        "piles": piles,
        "samples": samples,
    }
    mpath = os.path.join(root, "manifest.json")
    tmp = mpath + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, mpath)
    return manifest


def load_manifest(root: str) -> dict:
    with open(os.path.join(root, "manifest.json")) as fh:
        manifest = json.load(fh)
    if manifest.get("schema") != C.DATASET_SCHEMA:
        raise ValueError(f"unexpected dataset schema {manifest.get('schema')!r}")
    return manifest
