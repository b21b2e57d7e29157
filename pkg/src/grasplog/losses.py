"""Reference implementations of the training losses.

These are the numerical contract for any trainer: binary cross entropy on
the graspability indicator plus indicator-masked regression terms, with a
skewed width loss that penalizes too-narrow predictions twice as hard as
too-wide ones at the default skew. Analytic gradients are provided and
verified against central finite differences.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict

import numpy as np

from . import constants as C
from .geometry import Rng


@dataclass(frozen=True)
class LossWeights:
    lambda_c: float = C.LAMBDA_C
    lambda_s: float = C.LAMBDA_S
    lambda_w: float = C.LAMBDA_W
    lambda_b: float = C.LAMBDA_B
    gamma: float = C.GAMMA

    def __post_init__(self):
        if min(self.lambda_c, self.lambda_s, self.lambda_w, self.lambda_b) < 0:
            raise ValueError("loss weights must be non-negative")
        if not 0.0 < self.gamma < 0.5:
            raise ValueError("gamma must lie in (0, 1/2)")


def _check_shapes(*arrays):
    shape = np.asarray(arrays[0]).shape
    for a in arrays[1:]:
        if np.asarray(a).shape != shape:
            raise ValueError("loss inputs must share one shape")


def bce(u: np.ndarray, u_hat: np.ndarray) -> float:
    """Mean binary cross entropy over all pixels (unmasked)."""
    _check_shapes(u, u_hat)
    u = np.asarray(u, dtype=np.float64)
    u_hat = np.clip(np.asarray(u_hat, dtype=np.float64),
                    C.BCE_EPS, 1.0 - C.BCE_EPS)
    return float(np.mean(-(u * np.log(u_hat) + (1.0 - u) * np.log(1.0 - u_hat))))


def bce_grad(u: np.ndarray, u_hat: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    u_hat = np.clip(np.asarray(u_hat, dtype=np.float64),
                    C.BCE_EPS, 1.0 - C.BCE_EPS)
    return (u_hat - u) / (u_hat * (1.0 - u_hat) * u.size)


def mmse(u: np.ndarray, y: np.ndarray, y_hat: np.ndarray) -> float:
    """Masked mean squared error: pixels with u = 0 contribute nothing."""
    _check_shapes(u, y, y_hat)
    u = np.asarray(u, dtype=np.float64)
    eps = np.asarray(y, dtype=np.float64) - np.asarray(y_hat, dtype=np.float64)
    return float(np.sum(u * eps * eps) / u.size)


def mmse_grad(u: np.ndarray, y: np.ndarray, y_hat: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    eps = np.asarray(y, dtype=np.float64) - np.asarray(y_hat, dtype=np.float64)
    return -2.0 * u * eps / u.size


def skewed_w_loss(u: np.ndarray, w: np.ndarray, w_hat: np.ndarray,
                  gamma: float = C.GAMMA) -> float:
    """Masked width loss with sign-skewed penalty.

    A positive error (prediction too narrow) costs (1 + gamma/(1-gamma))
    times the symmetric term; a negative one is discounted accordingly.
    """
    _check_shapes(u, w, w_hat)
    u = np.asarray(u, dtype=np.float64)
    eps = np.asarray(w, dtype=np.float64) - np.asarray(w_hat, dtype=np.float64)
    term = (1.0 - gamma) * eps * eps + gamma * eps * np.abs(eps)
    return float(np.sum(u * term) / u.size)


def skewed_w_grad(u: np.ndarray, w: np.ndarray, w_hat: np.ndarray,
                  gamma: float = C.GAMMA) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    eps = np.asarray(w, dtype=np.float64) - np.asarray(w_hat, dtype=np.float64)
    return -u * (2.0 * (1.0 - gamma) * eps + 2.0 * gamma * np.abs(eps)) / u.size


def total_loss(target, prediction,
               weights: LossWeights = LossWeights()) -> float:
    """Combined loss over (C, S, W, U, B) channel tuples or stacks."""
    tc, ts, tw, tu, tb = _channels(target)
    pc, ps, pw, pu, pb = _channels(prediction)
    return (bce(tu, pu)
            + weights.lambda_c * mmse(tu, tc, pc)
            + weights.lambda_s * mmse(tu, ts, ps)
            + weights.lambda_w * skewed_w_loss(tu, tw, pw, weights.gamma)
            + weights.lambda_b * mmse(tu, tb, pb))


def _channels(g):
    if hasattr(g, "stack"):
        g = g.stack()
    g = np.asarray(g, dtype=np.float64)
    if g.shape[0] != 5:
        raise ValueError("expected 5 channels (C, S, W, U, B)")
    return g[0], g[1], g[2], g[3], g[4]


_GRAD_FNS = {
    "bce": (lambda u, y, y_hat: bce(u, y_hat), bce_grad),
    "mmse": (mmse, mmse_grad),
    "skew": (skewed_w_loss, skewed_w_grad),
}


def grad_check(kind: str, u: np.ndarray, y: np.ndarray, y_hat: np.ndarray,
               h: float = 1e-5) -> float:
    """Max relative error of the analytic gradient vs central differences."""
    if kind not in _GRAD_FNS:
        raise ValueError(f"unknown loss kind {kind!r}")
    loss_fn, grad_fn = _GRAD_FNS[kind]
    if kind == "bce":
        analytic = grad_fn(u, y_hat)
    else:
        analytic = grad_fn(u, y, y_hat)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    worst = 0.0
    it = np.nditer(y_hat, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        plus = y_hat.copy()
        plus[idx] += h
        minus = y_hat.copy()
        minus[idx] -= h
        numeric = (loss_fn(u, y, plus) - loss_fn(u, y, minus)) / (2.0 * h)
        denom = max(abs(numeric), abs(float(analytic[idx])), 1e-8)
        worst = max(worst, abs(numeric - float(analytic[idx])) / denom)
    return worst


# --------------------------------------------------------------------------
# Golden values for trainer parity
# --------------------------------------------------------------------------

_GOLDEN_SIZE = 8
_GOLDEN_SEEDS = tuple(range(10))


def _golden_case(seed: int):
    rng = Rng(derive_key(seed))
    n = _GOLDEN_SIZE

    def arr(lo, hi):
        return np.array([[rng.uniform(lo, hi) for _ in range(n)]
                         for _ in range(n)])

    u = np.array([[1.0 if rng.random() < 0.3 else 0.0 for _ in range(n)]
                  for _ in range(n)])
    target = np.stack([arr(-1, 1), arr(-1, 1), arr(C.W_MIN, C.W_MAX), u,
                       arr(0, 1)])
    pred = np.stack([arr(-1, 1), arr(-1, 1), arr(C.W_MIN, C.W_MAX),
                     arr(0.01, 0.99), arr(0, 1)])
    return target, pred


def derive_key(seed: int) -> int:
    return 0x500D_0000 + seed


def golden_values() -> dict:
    """Loss values (and inputs) on fixed seeds, for trainer parity tests."""
    weights = LossWeights()
    cases = []
    for seed in _GOLDEN_SEEDS:
        target, pred = _golden_case(seed)
        tc, ts, tw, tu, tb = target
        pc, ps, pw, pu, pb = pred
        cases.append({
            "seed": seed,
            "target": target.tolist(),
            "prediction": pred.tolist(),
            "losses": {
                "bce": bce(tu, pu),
                "mmse_c": mmse(tu, tc, pc),
                "mmse_s": mmse(tu, ts, ps),
                "skew_w": skewed_w_loss(tu, tw, pw, weights.gamma),
                "mmse_b": mmse(tu, tb, pb),
                "total": total_loss(target, pred, weights),
            },
        })
    return {
        "channel_order": list("CSWUB"),
        "weights": asdict(weights),
        "bce_eps": C.BCE_EPS,
        "cases": cases,
    }


def write_golden(path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(golden_values(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
