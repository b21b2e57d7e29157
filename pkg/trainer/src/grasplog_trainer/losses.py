"""Torch mirror of the dataset's loss contract.

Must agree with the reference values shipped in ``losses_golden.json``
to a relative error below 1e-4 (float32 evaluation).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

BCE_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    lambda_c: float = 30.0
    lambda_s: float = 30.0
    lambda_w: float = 60.0
    lambda_b: float = 120.0
    gamma: float = 1.0 / 3.0


def bce(u: torch.Tensor, u_hat: torch.Tensor) -> torch.Tensor:
    u_hat = u_hat.clamp(BCE_EPS, 1.0 - BCE_EPS)
    return -(u * torch.log(u_hat)
             + (1.0 - u) * torch.log(1.0 - u_hat)).mean()


def mmse(u: torch.Tensor, y: torch.Tensor, y_hat: torch.Tensor
         ) -> torch.Tensor:
    eps = y - y_hat
    return (u * eps * eps).sum() / u.numel()


def skewed_w_loss(u: torch.Tensor, w: torch.Tensor, w_hat: torch.Tensor,
                  gamma: float = 1.0 / 3.0) -> torch.Tensor:
    eps = w - w_hat
    term = (1.0 - gamma) * eps * eps + gamma * eps * eps.abs()
    return (u * term).sum() / u.numel()


def total_loss(target: torch.Tensor, pred: torch.Tensor,
               weights: LossWeights = LossWeights()) -> torch.Tensor:
    """Combined loss over (B, 5, H, W) or (5, H, W) stacks."""
    if target.dim() == 3:
        target = target.unsqueeze(0)
        pred = pred.unsqueeze(0)
    tc, ts, tw, tu, tb = (target[:, i] for i in range(5))
    pc, ps, pw, pu, pb = (pred[:, i] for i in range(5))
    return (bce(tu, pu)
            + weights.lambda_c * mmse(tu, tc, pc)
            + weights.lambda_s * mmse(tu, ts, ps)
            + weights.lambda_w * skewed_w_loss(tu, tw, pw, weights.gamma)
            + weights.lambda_b * mmse(tu, tb, pb))
