"""Log-pile generation: sampled log geometry settled quasi-statically.

Instead of time-stepped rigid-body dynamics, each dropped log is rested on
the already-placed logs and the terrain by solving a tiny two-variable
linear program: minimize the centerline height subject to ``z(s) >= support``
at every candidate contact, with the tilt bounded. The optimum touches at
least one support, reproducing the layered crossing structure the grasp
planner needs.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import constants as C
from .geometry import OrientedRect, Rng, normalize_angle
from .kernels import derive_seed, perlin_points


@dataclass(frozen=True)
class Log:
    """A rigid log: planar pose plus settled height and tilt."""

    id: int
    cx: float
    cy: float
    yaw: float          # [0, pi), direction of the centerline in the plane
    tilt: float         # signed; z grows along +yaw direction when positive
    z_center: float     # height of the centerline midpoint [m]
    length: float
    diameter: float
    density: float = C.LOG_DENSITY

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    @property
    def radius(self) -> float:
        return 0.5 * self.diameter

    @property
    def dir2(self) -> np.ndarray:
        return np.array([math.cos(self.yaw), math.sin(self.yaw)])

    @property
    def half_len_2d(self) -> float:
        return 0.5 * self.length * math.cos(self.tilt)

    def endpoints_2d(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.dir2 * self.half_len_2d
        c = np.array([self.cx, self.cy])
        return c - d, c + d

    def endpoints_3d(self) -> tuple[np.ndarray, np.ndarray]:
        a2, b2 = self.endpoints_2d()
        dz = 0.5 * self.length * math.sin(self.tilt)
        return (np.array([a2[0], a2[1], self.z_center - dz]),
                np.array([b2[0], b2[1], self.z_center + dz]))

    def z_at(self, s: float) -> float:
        """Centerline height at signed horizontal offset ``s`` along yaw."""
        return self.z_center + math.tan(self.tilt) * s

    def top_at(self, s: float) -> float:
        return self.z_at(s) + self.radius

    @property
    def mass(self) -> float:
        return self.density * math.pi * self.radius ** 2 * self.length

    def footprint_rect(self) -> OrientedRect:
        return OrientedRect(self.cx, self.cy, self.yaw,
                            max(2.0 * self.half_len_2d, 1e-6), self.diameter)


@dataclass(frozen=True)
class Heightfield:
    """Perlin terrain over a square extent with bilinear interpolation."""

    seed: int
    grid: np.ndarray
    extent: float = C.EXTENT
    octaves: int = C.TERRAIN_OCTAVES
    amplitude: float = C.TERRAIN_AMPLITUDE
    scale: float = C.TERRAIN_SCALE

    @classmethod
    def generate(cls, seed: int, grid_n: int = C.TERRAIN_GRID_N,
                 extent: float = C.EXTENT, octaves: int = C.TERRAIN_OCTAVES,
                 amplitude: float = C.TERRAIN_AMPLITUDE,
                 scale: float = C.TERRAIN_SCALE) -> "Heightfield":
        coords = np.linspace(0.0, extent, grid_n)
        gx, gy = np.meshgrid(coords, coords, indexing="xy")
        grid = perlin_points(gx, gy, octaves, amplitude, scale, seed)
        return cls(seed=seed, grid=grid, extent=extent, octaves=octaves,
                   amplitude=amplitude, scale=scale)

    def height(self, x, y):
        """Bilinear terrain height; clamped to the extent at the borders."""
        n = self.grid.shape[0]
        step = self.extent / (n - 1)
        fx = np.clip(np.asarray(x, dtype=np.float64) / step, 0, n - 1)
        fy = np.clip(np.asarray(y, dtype=np.float64) / step, 0, n - 1)
        ix = np.minimum(fx.astype(np.int64), n - 2)
        iy = np.minimum(fy.astype(np.int64), n - 2)
        tx = fx - ix
        ty = fy - iy
        g = self.grid
        h = (g[iy, ix] * (1 - tx) * (1 - ty) + g[iy, ix + 1] * tx * (1 - ty)
             + g[iy + 1, ix] * (1 - tx) * ty + g[iy + 1, ix + 1] * tx * ty)
        return float(h) if np.isscalar(x) else h


@dataclass(frozen=True)
class Pile:
    """A settled collection of logs on a heightfield."""

    logs: tuple[Log, ...]
    heightfield: Heightfield
    seed: int
    drop_order: tuple[int, ...]

    @property
    def log_ids(self) -> tuple[int, ...]:
        return tuple(log.id for log in self.logs)

    def log_by_id(self, log_id: int) -> Log:
        for log in self.logs:
            if log.id == log_id:
                return log
        raise KeyError(f"no log with id {log_id}")


def sample_log(rng: Rng, log_id: int = 0,
               diameter_scale: float = 1.0) -> Log:
    """Draw log dimensions; pose and height are filled in when placed."""
    length = min(max(rng.normal(C.LOG_LENGTH_MEAN, C.LOG_LENGTH_STD),
                     C.LOG_LENGTH_RANGE[0]), C.LOG_LENGTH_RANGE[1])
    diameter = min(max(rng.normal(C.LOG_DIAMETER_MEAN, C.LOG_DIAMETER_STD),
                       C.LOG_DIAMETER_RANGE[0]), C.LOG_DIAMETER_RANGE[1])
    diameter *= diameter_scale
    return Log(id=log_id, cx=0.0, cy=0.0, yaw=0.0, tilt=0.0,
               z_center=diameter / 2.0, length=length, diameter=diameter)


_SUPPORT_SAMPLE_STEP = 0.05  # centerline sampling resolution [m]
_TILT_BOUND = math.tan(C.MAX_TILT) * 0.999


def _support_constraints(log: Log, placed: list[Log],
                         heightfield: Heightfield):
    """(s_i, b_i) pairs constraining the new log's centerline z(s) >= b_i.

    The centerline is sampled densely; at each sample the constraint is the
    terrain clearance plus, for every placed log closer than the sum of
    radii in the plane, the cylinder-on-cylinder resting height. Crossings
    and near-parallel side contacts are handled by the same formula.
    """
    hl = 0.5 * log.length
    d = log.dir2
    n_samples = max(9, int(round(log.length / _SUPPORT_SAMPLE_STEP)) + 1)
    ts = np.linspace(-hl, hl, n_samples)
    px = log.cx + ts * d[0]
    py = log.cy + ts * d[1]
    tz = np.atleast_1d(heightfield.height(px, py))
    s_vals = list(ts)
    b_vals = list(tz + log.radius)
    for other in placed:
        oa, ob = other.endpoints_2d()
        seg = ob - oa
        seg_len2 = float(seg @ seg)
        rsum = log.radius + other.radius
        for s, x, y in zip(ts, px, py):
            if seg_len2 > 0.0:
                u = ((x - oa[0]) * seg[0] + (y - oa[1]) * seg[1]) / seg_len2
                u = min(max(u, 0.0), 1.0)
            else:
                u = 0.0
            qx = oa[0] + u * seg[0]
            qy = oa[1] + u * seg[1]
            h_off2 = (x - qx) ** 2 + (y - qy) ** 2
            if h_off2 < rsum * rsum:
                s_other = (u - 0.5) * 2.0 * other.half_len_2d
                lift = math.sqrt(rsum * rsum - h_off2)
                s_vals.append(float(s))
                b_vals.append(other.z_at(s_other) + lift)
    return np.array(s_vals), np.array(b_vals)


def settle_log(log: Log, placed: list[Log],
               heightfield: Heightfield) -> Log:
    """Rest a log on prior logs and terrain; returns it with z and tilt set.

    Minimizes the center height z_c over (z_c, m) subject to
    z_c + m*s_i >= b_i and |m| <= tan(max tilt). The convex piecewise-linear
    objective is evaluated at every pairwise constraint intersection.
    """
    s, b = _support_constraints(log, placed, heightfield)

    def zc_of(m):
        return float(np.max(b - m * s))

    candidates = [-_TILT_BOUND, _TILT_BOUND]
    for i in range(len(s)):
        ds = s[i] - s[:i]
        with np.errstate(divide="ignore", invalid="ignore"):
            ms = np.where(np.abs(ds) > 1e-9, (b[i] - b[:i]) / ds, np.nan)
        for m in ms:
            if np.isfinite(m) and abs(m) <= _TILT_BOUND:
                candidates.append(float(m))
    best = None
    for m in candidates:
        zc = zc_of(m)
        key = (zc, abs(m), m)
        if best is None or key < best[0]:
            best = (key, m, zc)
    _, m, zc = best
    return replace(log, tilt=math.atan(m), z_center=zc)


def _in_extent(log: Log, extent: float) -> bool:
    a, b = log.endpoints_2d()
    r = log.radius
    for p in (a, b):
        if not (r <= p[0] <= extent - r and r <= p[1] <= extent - r):
            return False
    return True


def generate_pile(n_logs: int, seed: int,
                  diameter_scale: float = 1.0) -> Pile:
    """Generate and settle a pile; deterministic in the seed."""
    if not 1 <= n_logs <= 16:
        raise ValueError("n_logs must be in [1, 16]")
    rng = Rng(seed)
    heightfield = Heightfield.generate(derive_seed(seed, 1))
    lo = 0.5 * (C.EXTENT - C.DROP_ZONE)
    hi = lo + C.DROP_ZONE
    placed: list[Log] = []
    for i in range(n_logs):
        proto = sample_log(rng, log_id=i, diameter_scale=diameter_scale)
        for attempt in range(C.PLACEMENT_RETRIES + 1):
            if attempt == C.PLACEMENT_RETRIES:
                raise RuntimeError("pile generation failed: "
                                   f"placement retries exhausted for log {i}")
            pose = replace(proto,
                           cx=rng.uniform(lo, hi),
                           cy=rng.uniform(lo, hi),
                           yaw=rng.uniform(0.0, math.pi))
            settled = settle_log(pose, placed, heightfield)
            if _in_extent(settled, C.EXTENT) and abs(settled.tilt) < C.MAX_TILT:
                placed.append(settled)
                break
    return Pile(logs=tuple(placed), heightfield=heightfield, seed=seed,
                drop_order=tuple(range(n_logs)))


def resettle(pile: Pile, keep_ids) -> Pile:
    """Re-run the support rule for a subset of logs, preserving drop order."""
    keep = set(keep_ids)
    placed: list[Log] = []
    for log_id in pile.drop_order:
        if log_id not in keep:
            continue
        log = pile.log_by_id(log_id)
        placed.append(settle_log(log, placed, pile.heightfield))
    return Pile(logs=tuple(placed), heightfield=pile.heightfield,
                seed=pile.seed, drop_order=tuple(l.id for l in placed))


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def pile_to_dict(pile: Pile) -> dict:
    hf = pile.heightfield
    return {
        "schema": C.PILE_SCHEMA,
        "seed": pile.seed,
        "drop_order": list(pile.drop_order),
        "heightfield": {
            "seed": hf.seed,
            "grid_n": int(hf.grid.shape[0]),
            "extent": hf.extent,
            "octaves": hf.octaves,
            "amplitude": hf.amplitude,
            "scale": hf.scale,
        },
        "logs": [
            {
                "id": log.id,
                "cx": round(log.cx, 6),
                "cy": round(log.cy, 6),
                "yaw": round(log.yaw, 6),
                "tilt": round(log.tilt, 6),
                "z_center": round(log.z_center, 6),
                "length": round(log.length, 6),
                "diameter": round(log.diameter, 6),
                "density": round(log.density, 6),
            }
            for log in pile.logs
        ],
    }


def pile_from_dict(data: dict) -> Pile:
    if data.get("schema") != C.PILE_SCHEMA:
        raise ValueError(f"unsupported pile schema: {data.get('schema')!r}")
    hf_meta = data["heightfield"]
    heightfield = Heightfield.generate(
        seed=hf_meta["seed"], grid_n=hf_meta["grid_n"],
        extent=hf_meta["extent"], octaves=hf_meta["octaves"],
        amplitude=hf_meta["amplitude"], scale=hf_meta["scale"])
    logs = tuple(
        Log(id=entry["id"], cx=entry["cx"], cy=entry["cy"], yaw=entry["yaw"],
            tilt=entry["tilt"], z_center=entry["z_center"],
            length=entry["length"], diameter=entry["diameter"],
            density=entry["density"])
        for entry in data["logs"]
    )
    return Pile(logs=logs, heightfield=heightfield, seed=data["seed"],
                drop_order=tuple(data["drop_order"]))


def save_pile(pile: Pile, path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(pile_to_dict(pile), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_pile(path: str) -> Pile:
    with open(path) as fh:
        return pile_from_dict(json.load(fh))
