"""Orthographic top-down rasterization of piles into RGB-D and masks.

The camera sits on a plane 5 m above the ground looking straight down.
Shading is a flat analytic substitute for a real renderer: Perlin-mottled
ground colors and Lambert-lit wood tones, which keeps rendering fully
deterministic and dependency-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants as C
from .kernels import derive_seed, perlin_points, raster_cylinders, splitmix64
from .scene import Pile

_LIGHT_DIR = np.array([-0.5, 0.5, math.sqrt(0.5)])  # 45 deg elevation
_GROUND_BROWN = np.array([0.36, 0.27, 0.17])
_GROUND_GREEN = np.array([0.30, 0.40, 0.20])


@dataclass(frozen=True)
class ImageGrid:
    """Mapping between pixel indices and world coordinates.

    Row j counts from the top of the image, so pixel (j, k) sits at
    x = (k + 0.5) * pitch, y = (N - 1 - j + 0.5) * pitch.
    """

    n: int = C.DEFAULT_RESOLUTION
    extent: float = C.EXTENT

    @property
    def pitch(self) -> float:
        return self.extent / self.n

    def xs(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.pitch

    def ys(self) -> np.ndarray:
        return (self.n - 1 - np.arange(self.n) + 0.5) * self.pitch

    def pixel_to_xy(self, j: int, k: int) -> tuple[float, float]:
        return ((k + 0.5) * self.pitch, (self.n - 1 - j + 0.5) * self.pitch)

    def xy_to_pixel(self, x: float, y: float) -> tuple[int, int]:
        k = min(max(int(x / self.pitch), 0), self.n - 1)
        j = min(max(self.n - 1 - int(y / self.pitch), 0), self.n - 1)
        return j, k


@dataclass(frozen=True)
class RgbdImage:
    rgb: np.ndarray    # (N, N, 3) floats in [0, 1]
    depth: np.ndarray  # (N, N) meters from the camera plane at z = 5 m


@dataclass(frozen=True)
class InstanceMasks:
    ids: tuple[int, ...]
    masks: np.ndarray  # (L, N, N) uint8, pairwise disjoint

    def mask_for(self, log_id: int) -> np.ndarray:
        return self.masks[self.ids.index(log_id)]


def _log_tone(log_id: int, pile_seed: int) -> np.ndarray:
    t = splitmix64(derive_seed(pile_seed, 77, log_id)) / 2.0 ** 64
    return np.array([0.45 + 0.25 * t, 0.28 + 0.14 * t, 0.14 + 0.07 * t])


def render(pile: Pile, grid: ImageGrid | None = None
           ) -> tuple[RgbdImage, InstanceMasks]:
    """Z-buffered orthographic render; per-pixel topmost surface owns masks."""
    grid = grid or ImageGrid()
    xs = grid.xs()
    ys = grid.ys()
    gx, gy = np.meshgrid(xs, ys)
    terrain_z = np.asarray(pile.heightfield.height(gx, gy), dtype=np.float64)

    n_logs = len(pile.logs)
    seg_a = np.zeros((n_logs, 3))
    seg_b = np.zeros((n_logs, 3))
    radii = np.zeros(n_logs)
    for i, log in enumerate(pile.logs):
        a, b = log.endpoints_3d()
        seg_a[i] = a
        seg_b[i] = b
        radii[i] = log.radius

    z_top, owner, normals = raster_cylinders(xs, ys, terrain_z,
                                             seg_a, seg_b, radii)
    depth = C.CAMERA_HEIGHT - z_top

    # ground color: Perlin-mottled brown/green blend
    mottle = perlin_points(gx, gy, 3, 1.0, 0.35,
                           derive_seed(pile.heightfield.seed, 7))
    mix = np.clip(0.5 + mottle, 0.0, 1.0)[..., None]
    rgb = _GROUND_BROWN * (1.0 - mix) + _GROUND_GREEN * mix

    lambert = np.clip(normals @ _LIGHT_DIR, 0.0, None)
    shade = 0.35 + 0.65 * lambert
    for i, log in enumerate(pile.logs):
        sel = owner == i
        rgb[sel] = _log_tone(log.id, pile.seed) * shade[sel, None]
    rgb = np.clip(rgb, 0.0, 1.0)

    masks = np.zeros((n_logs, grid.n, grid.n), dtype=np.uint8)
    for i in range(n_logs):
        masks[i] = (owner == i).astype(np.uint8)
    return (RgbdImage(rgb=rgb, depth=depth),
            InstanceMasks(ids=pile.log_ids, masks=masks))


def make_target_mask(masks: InstanceMasks, targets) -> np.ndarray:
    """Pixel-wise union of the member masks of the target id-set."""
    targets = tuple(targets)
    if not targets:
        raise ValueError("target set must be non-empty")
    out = None
    for log_id in targets:
        if log_id not in masks.ids:
            raise KeyError(f"unknown log id {log_id}")
        m = masks.mask_for(log_id)
        out = m.copy() if out is None else np.maximum(out, m)
    return out
