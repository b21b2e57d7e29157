"""Export model predictions in the layout the evaluation harness reads.

Writes one ``pred_<sample_id>.gmt`` per sample. The doubled-angle pair is
renormalized to unit length so decoded angles are always well defined.
"""

from __future__ import annotations

import argparse
import logging
import os

import numpy as np
import torch

from .data import GraspMapDataset, load_manifest, sample_refs
from .gmt import write_tensor
from .train import load_model

log = logging.getLogger("grasplog_trainer")


def normalize_angles(stack: np.ndarray) -> np.ndarray:
    norm = np.hypot(stack[0], stack[1])
    norm[norm < 1e-6] = 1.0
    stack[0] /= norm
    stack[1] /= norm
    return stack


def export_predictions(model, root: str, out_dir: str,
                       split: str | None = None,
                       annotated_only: bool = True,
                       device: str = "cpu") -> int:
    manifest = load_manifest(root)
    refs = sample_refs(manifest, split=split, annotated_only=annotated_only)
    ds = GraspMapDataset(root, refs)
    os.makedirs(out_dir, exist_ok=True)
    model.eval()
    with torch.no_grad():
        for i, ref in enumerate(refs):
            inputs, _ = ds[i]
            pred = model(inputs.unsqueeze(0).to(device))[0]
            stack = normalize_angles(pred.cpu().numpy())
            write_tensor(os.path.join(out_dir, f"pred_{ref.sample_id}.gmt"),
                         stack)
    return len(refs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Write grasp-map predictions for a dataset.")
    parser.add_argument("root", help="dataset directory")
    parser.add_argument("--model", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--split", default=None)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    model = load_model(args.model)
    n = export_predictions(model, args.root, args.out, split=args.split)
    log.info("wrote %d prediction maps to %s", n, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
