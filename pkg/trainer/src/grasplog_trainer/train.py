"""Training loop: Adam with cosine decay, fully seeded."""

from __future__ import annotations

import argparse
import logging
import os
import random

import numpy as np
import torch
from torch.utils.data import DataLoader

from .data import GraspMapDataset, load_manifest, sample_refs
from .losses import LossWeights, total_loss
from .model import GraspUNet, count_parameters

log = logging.getLogger("grasplog_trainer")


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)


def train(root: str, out_path: str, epochs: int = 20, batch_size: int = 4,
          lr: float = 1e-3, width: int = 32, seed: int = 0,
          split: str = "train", device: str = "cpu",
          steps_per_epoch: int | None = None) -> dict:
    seed_everything(seed)
    manifest = load_manifest(root)
    refs = sample_refs(manifest, split=split)
    if not refs:
        # tiny datasets may not have been split; fall back to everything
        refs = sample_refs(manifest)
    ds = GraspMapDataset(root, refs)
    loader = DataLoader(ds, batch_size=batch_size, shuffle=True,
                        generator=torch.Generator().manual_seed(seed))

    model = GraspUNet(width=width).to(device)
    log.info("model has %d parameters", count_parameters(model))
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    total_steps = (steps_per_epoch or len(loader)) * epochs
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=max(
        total_steps, 1))
    weights = LossWeights()

    history = []
    step = 0
    model.train()
    for epoch in range(epochs):
        epoch_losses = []
        for inputs, targets in loader:
            inputs = inputs.to(device)
            targets = targets.to(device)
            opt.zero_grad()
            pred = model(inputs)
            loss = total_loss(targets, pred, weights)
            loss.backward()
            opt.step()
            sched.step()
            epoch_losses.append(float(loss.detach()))
            step += 1
            if steps_per_epoch and step % steps_per_epoch == 0:
                break
        mean_loss = float(np.mean(epoch_losses))
        history.append(mean_loss)
        log.info("epoch %d/%d loss %.4f", epoch + 1, epochs, mean_loss)

    torch.save({"model": model.state_dict(), "width": width,
                "seed": seed, "history": history}, out_path)
    return {"history": history, "parameters": count_parameters(model)}


def load_model(path: str, device: str = "cpu") -> GraspUNet:
    ckpt = torch.load(path, map_location=device, weights_only=True)
    model = GraspUNet(width=ckpt["width"]).to(device)
    model.load_state_dict(ckpt["model"])
    model.eval()
    return model


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Train a grasp-map U-Net on a generated dataset.")
    parser.add_argument("root", help="dataset directory")
    parser.add_argument("--out", default="model.pt")
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--width", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--split", default="train")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    result = train(args.root, args.out, epochs=args.epochs,
                   batch_size=args.batch_size, lr=args.lr,
                   width=args.width, seed=args.seed, split=args.split)
    log.info("final loss %.4f -> %s", result["history"][-1], args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
