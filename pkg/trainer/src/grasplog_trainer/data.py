"""Dataset access: manifest parsing and (input, target) tensor pairs."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import torch
from torch.utils.data import Dataset

from .gmt import read_tensor


@dataclass(frozen=True)
class SampleRef:
    sample_id: str
    pile_id: str
    subset: tuple
    n_grasps: int
    split: str


def load_manifest(root: str) -> dict:
    with open(os.path.join(root, "manifest.json")) as fh:
        return json.load(fh)


def sample_refs(manifest: dict, split: str | None = None,
                annotated_only: bool = False) -> list[SampleRef]:
    refs = []
    for rec in manifest["samples"]:
        if split is not None and rec["split"] != split:
            continue
        if annotated_only and rec["n_grasps"] == 0:
            continue
        refs.append(SampleRef(rec["sample_id"], rec["pile_id"],
                              tuple(rec["subset"]), rec["n_grasps"],
                              rec["split"]))
    return refs


class GraspMapDataset(Dataset):
    """(input, target) pairs as float32 tensors, channels first."""

    def __init__(self, root: str, refs: list[SampleRef]):
        self.root = root
        self.refs = refs

    def __len__(self) -> int:
        return len(self.refs)

    def __getitem__(self, idx: int):
        ref = self.refs[idx]
        sdir = os.path.join(self.root, "samples", ref.sample_id)
        inp = read_tensor(os.path.join(sdir, "input.gmt"))
        tgt = read_tensor(os.path.join(sdir, "target.gmt"))
        return (torch.from_numpy(np.ascontiguousarray(inp)),
                torch.from_numpy(np.ascontiguousarray(tgt)))

    def tau(self, idx: int) -> int:
        return len(self.refs[idx].subset)
