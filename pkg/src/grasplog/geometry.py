"""Planar geometry primitives and seeded randomness.

Everything downstream (scenes, planning, encoding) builds on the types and
pure functions in this module. All randomness in the package flows through
:class:`Rng`; there is no ambient entropy anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import derive_seed, perlin_points, splitmix64

_MASK64 = (1 << 64) - 1
_PCG_MULT = 6364136223846793005


class Rng:
    """PCG32 generator seeded through splitmix64.

    The algorithm and constants are fixed so that identical seeds produce
    identical sequences on every platform, which makes generated datasets
    bit-reproducible.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed
        init_state = splitmix64(seed & _MASK64)
        init_seq = splitmix64(init_state ^ (stream & _MASK64))
        self._inc = ((init_seq << 1) | 1) & _MASK64
        self._state = 0
        self._next_u32()
        self._state = (self._state + init_state) & _MASK64
        self._next_u32()
        self._spare_normal = None

    def _next_u32(self) -> int:
        old = self._state
        self._state = (old * _PCG_MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def random(self) -> float:
        """Uniform float in [0, 1) with 32 bits of resolution."""
        return self._next_u32() / 4294967296.0

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 32) % n
        while True:
            r = self._next_u32()
            if r >= threshold:
                return r % n

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian sample via Box-Muller; pairs are cached."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
        else:
            u1 = 1.0 - self.random()  # avoid log(0)
            u2 = self.random()
            r = math.sqrt(-2.0 * math.log(u1))
            z = r * math.cos(2.0 * math.pi * u2)
            self._spare_normal = r * math.sin(2.0 * math.pi * u2)
        return mu + sigma * z

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def spawn(self, key: int) -> "Rng":
        """Child generator with an independent, reproducible stream."""
        return Rng(derive_seed(self.seed, key), stream=key)


def normalize_angle(phi: float) -> float:
    """Map an angle into [0, pi); ties at the branch cut resolve to 0."""
    phi = math.fmod(phi, math.pi)
    if phi < 0.0:
        phi += math.pi
    if phi >= math.pi:
        phi = 0.0
    return phi


@dataclass(frozen=True)
class Angle2Enc:
    """Doubled-angle encoding (cos 2phi, sin 2phi) of a pi-periodic angle."""

    c: float
    s: float


def encode_angle(phi: float) -> Angle2Enc:
    """Encode an angle as (cos 2phi, sin 2phi); pi-periodic by construction."""
    if not math.isfinite(phi):
        raise ValueError("angle must be finite")
    return Angle2Enc(math.cos(2.0 * phi), math.sin(2.0 * phi))


def decode_angle(enc: Angle2Enc) -> float:
    """Inverse of :func:`encode_angle`, returned in [0, pi)."""
    if enc.c == 0.0 and enc.s == 0.0:
        raise ValueError("undefined angle: zero encoding vector")
    return normalize_angle(0.5 * math.atan2(enc.s, enc.c))


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle given by center, length-axis direction, and side lengths.

    ``angle`` is the direction of the rectangle's length axis, CCW from +x,
    normalized to [0, pi).
    """

    cx: float
    cy: float
    angle: float
    length: float
    breadth: float

    def __post_init__(self):
        if self.length <= 0 or self.breadth <= 0:
            raise ValueError("rect sides must be positive")
        object.__setattr__(self, "angle", normalize_angle(self.angle))

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit vectors along the length and breadth directions."""
        u = np.array([math.cos(self.angle), math.sin(self.angle)])
        v = np.array([-u[1], u[0]])
        return u, v

    def corners(self) -> np.ndarray:
        """(4, 2) CCW corner coordinates."""
        u, v = self.axes()
        c = np.array([self.cx, self.cy])
        hl = 0.5 * self.length * u
        hb = 0.5 * self.breadth * v
        return np.array([c + hl + hb, c - hl + hb, c - hl - hb, c + hl - hb])

    def area(self) -> float:
        return self.length * self.breadth

    def contains_points(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Boolean inside-test (boundary inclusive) for arrays of points."""
        u, v = self.axes()
        dx = np.asarray(x) - self.cx
        dy = np.asarray(y) - self.cy
        lu = dx * u[0] + dy * u[1]
        lv = dx * v[0] + dy * v[1]
        return (np.abs(lu) <= 0.5 * self.length) & (np.abs(lv) <= 0.5 * self.breadth)


def _clip_polygon(poly: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of ``poly`` by the half-plane left of a->b."""
    out = []
    n = len(poly)
    ex = b[0] - a[0]
    ey = b[1] - a[1]
    for i in range(n):
        p = poly[i]
        q = poly[(i + 1) % n]
        sp = ex * (p[1] - a[1]) - ey * (p[0] - a[0])
        sq = ex * (q[1] - a[1]) - ey * (q[0] - a[0])
        if sp >= 0.0:
            out.append(p)
        if (sp > 0.0 > sq) or (sp < 0.0 < sq):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.empty((0, 2))


def _shoelace(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def rect_overlap_area(a: OrientedRect, b: OrientedRect) -> float:
    """Area of the intersection of two oriented rectangles [m^2]."""
    poly = b.corners()
    ca = a.corners()
    for i in range(4):
        poly = _clip_polygon(poly, ca[i], ca[(i + 1) % 4])
        if len(poly) == 0:
            return 0.0
    return _shoelace(poly)


def rects_intersect(a: OrientedRect, b: OrientedRect) -> bool:
    """Separating-axis overlap test (boundary contact counts as overlap)."""
    ua, va = a.axes()
    ub, vb = b.axes()
    d = np.array([b.cx - a.cx, b.cy - a.cy])
    for axis in (ua, va, ub, vb):
        ra = 0.5 * a.length * abs(np.dot(ua, axis)) + 0.5 * a.breadth * abs(np.dot(va, axis))
        rb = 0.5 * b.length * abs(np.dot(ub, axis)) + 0.5 * b.breadth * abs(np.dot(vb, axis))
        if abs(np.dot(d, axis)) > ra + rb:
            return False
    return True


def perlin2(x, y, octaves: int, amplitude: float, scale: float,
            seed: int):
    """Deterministic fractal Perlin noise; see :func:`kernels.perlin_points`."""
    arr_x = np.asarray(x, dtype=np.float64)
    arr_y = np.asarray(y, dtype=np.float64)
    scalar = arr_x.ndim == 0
    out = perlin_points(np.atleast_1d(arr_x), np.atleast_1d(arr_y),
                        octaves, amplitude, scale, seed)
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Segment helpers
# --------------------------------------------------------------------------

def seg_seg_intersection(p1, p2, p3, p4):
    """Parameters (t, u) of the crossing of two segments, or ``None``.

    t is the fraction along p1->p2, u along p3->p4; both in [0, 1] when the
    segments cross. Parallel segments return ``None``.
    """
    d1x = p2[0] - p1[0]
    d1y = p2[1] - p1[1]
    d2x = p4[0] - p3[0]
    d2y = p4[1] - p3[1]
    denom = d1x * d2y - d1y * d2x
    if abs(denom) < 1e-12:
        return None
    rx = p3[0] - p1[0]
    ry = p3[1] - p1[1]
    t = (rx * d2y - ry * d2x) / denom
    u = (rx * d1y - ry * d1x) / denom
    if -1e-12 <= t <= 1.0 + 1e-12 and -1e-12 <= u <= 1.0 + 1e-12:
        return (min(max(t, 0.0), 1.0), min(max(u, 0.0), 1.0))
    return None


def seg_rect_clip(p1, p2, rect: OrientedRect):
    """Clip segment p1->p2 to an oriented rect; returns (t0, t1) or ``None``.

    The parameters are fractions along the segment of the portion inside the
    rectangle.
    """
    u, v = rect.axes()
    dx = p2[0] - p1[0]
    dy = p2[1] - p1[1]
    t0, t1 = 0.0, 1.0
    for axis, half in ((u, 0.5 * rect.length), (v, 0.5 * rect.breadth)):
        pos = (p1[0] - rect.cx) * axis[0] + (p1[1] - rect.cy) * axis[1]
        vel = dx * axis[0] + dy * axis[1]
        if abs(vel) < 1e-15:
            if abs(pos) > half:
                return None
            continue
        ta = (-half - pos) / vel
        tb = (half - pos) / vel
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return None
    return (t0, t1)
