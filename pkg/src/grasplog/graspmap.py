"""Five-channel grasp maps: encoding, quality ranking, argmax decoding.

Channel order is fixed as (C, S, W, U, B): doubled-angle cosine/sine, grasp
width, graspability indicator, and balance. Pixels not covered by any grasp
rectangle carry sentinel values that are never read by losses or decoding
(the indicator is zero there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants as C
from .geometry import Angle2Enc, OrientedRect, decode_angle
from .planner import Grasp
from .render import ImageGrid

CHANNEL_ORDER = ("C", "S", "W", "U", "B")


@dataclass(frozen=True)
class GraspMap:
    c: np.ndarray
    s: np.ndarray
    w: np.ndarray
    u: np.ndarray
    b: np.ndarray

    def stack(self) -> np.ndarray:
        """(5, N, N) array in the fixed channel order."""
        return np.stack([self.c, self.s, self.w, self.u, self.b])

    @classmethod
    def from_stack(cls, arr: np.ndarray) -> "GraspMap":
        if arr.ndim != 3 or arr.shape[0] != 5:
            raise ValueError(f"expected (5, N, N) tensor, got {arr.shape}")
        return cls(*(np.asarray(arr[i], dtype=np.float64) for i in range(5)))

    @classmethod
    def empty(cls, n: int) -> "GraspMap":
        return cls(
            c=np.full((n, n), C.SENTINEL_C),
            s=np.full((n, n), C.SENTINEL_S),
            w=np.full((n, n), C.SENTINEL_W),
            u=np.zeros((n, n)),
            b=np.full((n, n), C.SENTINEL_B),
        )


@dataclass(frozen=True)
class QualityParams:
    kind: str = "f1"  # one of f1, f2, f3
    mu: float = C.QUALITY_MU
    b_opt: float = C.QUALITY_B_OPT
    sigma_b: float = C.QUALITY_SIGMA_B

    def __post_init__(self):
        if self.kind not in ("f1", "f2", "f3"):
            raise ValueError(f"unknown quality function {self.kind!r}")
        if self.sigma_b <= 0 or self.mu < 0:
            raise ValueError("sigma_b must be > 0 and mu >= 0")


def encode_rect(grasp: Grasp) -> OrientedRect:
    """Constant-size rectangle marking a grasp's spatial support."""
    return OrientedRect(grasp.x, grasp.y, grasp.phi,
                        C.ENCODE_RECT_CLOSING, C.ENCODE_RECT_AXIAL)


def encode(grasps, grid: ImageGrid) -> GraspMap:
    """Rasterize annotated grasps ``[(Grasp, b), ...]`` into a grasp map.

    Wider grasps are painted first so that where rectangles overlap the
    narrower grasp wins deterministically.
    """
    gm = GraspMap.empty(grid.n)
    xs = grid.xs()
    ys = grid.ys()
    gx, gy = np.meshgrid(xs, ys)
    order = sorted(range(len(grasps)), key=lambda i: -grasps[i][0].w)
    for i in order:
        grasp, bal = grasps[i]
        inside = encode_rect(grasp).contains_points(gx, gy)
        gm.c[inside] = math.cos(2.0 * grasp.phi)
        gm.s[inside] = math.sin(2.0 * grasp.phi)
        gm.w[inside] = grasp.w
        gm.u[inside] = 1.0
        gm.b[inside] = bal
    return gm


def quality_map(gm: GraspMap, tau: int, params: QualityParams) -> np.ndarray:
    """Element-wise grasp quality Q = f(U, tau, B)."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if params.kind == "f1":
        return gm.u.copy()
    boost = float(tau) ** params.mu
    if params.kind == "f2":
        return gm.u * boost
    weight = np.exp(-((gm.b - params.b_opt) ** 2) / params.sigma_b ** 2)
    return gm.u * boost * weight


@dataclass(frozen=True)
class Selection:
    """A decoded optimal grasp with its quality and source pixel."""

    grasp: Grasp
    q: float
    pixel: tuple[int, int]
    b: float


def select_best(gm: GraspMap, tau: int, params: QualityParams,
                grid: ImageGrid,
                q_min: float = C.Q_MIN_DEFAULT) -> Selection | None:
    """Global argmax over the quality map, ties broken row-major.

    Returns ``None`` when the best quality falls below ``q_min``.
    """
    q = quality_map(gm, tau, params)
    flat = int(np.argmax(q))  # first maximum in row-major order
    j, k = divmod(flat, grid.n)
    q_val = float(q[j, k])
    if q_val < q_min:
        return None
    x, y = grid.pixel_to_xy(j, k)
    phi = decode_angle(Angle2Enc(float(gm.c[j, k]), float(gm.s[j, k])))
    w = min(max(float(gm.w[j, k]), C.W_MIN), C.W_MAX)
    return Selection(grasp=Grasp(x, y, phi, w, tau), q=q_val,
                     pixel=(j, k), b=float(gm.b[j, k]))


def select_over_subsets(maps, params: QualityParams, grid: ImageGrid,
                        q_min: float = C.Q_MIN_DEFAULT):
    """Best grasp across ``[(GraspMap, tau), ...]``; ties pick the lowest
    subset index. Returns ``(index, Selection)`` or ``None``."""
    if not maps:
        raise ValueError("maps list must be non-empty")
    best = None
    best_idx = None
    for idx, (gm, tau) in enumerate(maps):
        sel = select_best(gm, tau, params, grid, q_min=q_min)
        if sel is None:
            continue
        if best is None or sel.q > best.q:
            best = sel
            best_idx = idx
    if best is None:
        return None
    return best_idx, best
