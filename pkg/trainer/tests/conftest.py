"""Shared fixtures: a small generated dataset and an overfit model.

The dataset is produced through the generator CLI so that the trainer is
exercised against the same artifacts a real run would consume (manifest,
GMT1 tensors, golden loss file).
"""

import subprocess
import sys

import pytest
import torch

from grasplog_trainer.data import GraspMapDataset, load_manifest, sample_refs
from grasplog_trainer.losses import total_loss
from grasplog_trainer.model import GraspUNet


@pytest.fixture(scope="session")
def tiny_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset") / "tiny"
    subprocess.run(
        [sys.executable, "-m", "grasplog.cli", "gen",
         "--out", str(root), "--piles", "3", "--logs", "3",
         "--resolution", "64", "--seed", "321"],
        check=True,
    )
    return str(root)


@pytest.fixture(scope="session")
def overfit_result(tiny_root):
    """Memorize every annotated sample with a small model, full-batch.

    Returns the model, the step index at which the loss first dropped
    below 0.05, and the final loss value.
    """
    torch.manual_seed(0)
    manifest = load_manifest(tiny_root)
    refs = sample_refs(manifest, annotated_only=True)
    ds = GraspMapDataset(tiny_root, refs)
    inputs = torch.stack([ds[i][0] for i in range(len(ds))])
    targets = torch.stack([ds[i][1] for i in range(len(ds))])

    model = GraspUNet(width=16)
    opt = torch.optim.Adam(model.parameters(), lr=2e-3)
    first_below = None
    value = float("inf")
    for step in range(500):
        opt.zero_grad()
        loss = total_loss(targets, model(inputs))
        loss.backward()
        opt.step()
        value = loss.item()
        if first_below is None and value < 0.05:
            first_below = step
        if value < 0.03:
            break
    model.eval()
    return {"model": model, "first_below": first_below, "final": value}
