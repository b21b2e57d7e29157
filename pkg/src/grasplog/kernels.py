"""Hot numeric kernels: Perlin terrain noise and the cylinder rasterizer.

Each kernel has two implementations: a scalar loop compiled with numba's
``@njit``, and a vectorized pure-numpy fallback. The numpy path is selected
when numba is unavailable or when the environment variable
``GRASPLOG_NO_NUMBA`` is set to ``1``/``true``. ``benchmarks/bench_kernels.py``
times both paths against each other.
"""

import math
import os

import numpy as np

_MASK64 = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_M1 = 0xBF58476D1CE4E5B9
_SM_M2 = 0x94D049BB133111EB
_HASH_Y = 0xC2B2AE3D27D4EB4F
_TWO_PI_OVER_2_64 = 2.0 * math.pi / 2.0 ** 64

NUMBA_DISABLED = os.environ.get("GRASPLOG_NO_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via GRASPLOG_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # no-op stand-in
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


def splitmix64(x: int) -> int:
    """One splitmix64 scrambling step on a 64-bit integer (pure python)."""
    x = (x + _SM_GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * _SM_M1) & _MASK64
    x = ((x ^ (x >> 27)) * _SM_M2) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(seed: int, *keys: int) -> int:
    """Derive an independent child seed from a master seed and integer keys."""
    h = seed & _MASK64
    for k in keys:
        h = splitmix64((h ^ ((k & _MASK64) * _SM_GAMMA)) & _MASK64)
    return h


# --------------------------------------------------------------------------
# Perlin noise
# --------------------------------------------------------------------------

@njit(cache=True)
def _perlin_loop(x, y, octaves, amplitude, scale, seed, out):  # pragma: no cover
    n = x.size
    for i in range(n):
        total = 0.0
        amp = amplitude
        freq = 1.0 / scale
        for k in range(octaves):
            px = x[i] * freq
            py = y[i] * freq
            x0 = math.floor(px)
            y0 = math.floor(py)
            xf = px - x0
            yf = py - y0
            u = xf * xf * xf * (xf * (xf * 6.0 - 15.0) + 10.0)
            v = yf * yf * yf * (yf * (yf * 6.0 - 15.0) + 10.0)
            sk = np.uint64(seed) + np.uint64(k)
            n00 = 0.0
            n10 = 0.0
            n01 = 0.0
            n11 = 0.0
            for c in range(4):
                dx = c & 1
                dy = c >> 1
                hx = np.uint64(np.int64(x0) + dx) * np.uint64(_SM_GAMMA)
                hy = np.uint64(np.int64(y0) + dy) * np.uint64(_HASH_Y)
                h = hx ^ hy ^ sk
                h = h + np.uint64(_SM_GAMMA)
                h = (h ^ (h >> np.uint64(30))) * np.uint64(_SM_M1)
                h = (h ^ (h >> np.uint64(27))) * np.uint64(_SM_M2)
                h = h ^ (h >> np.uint64(31))
                ang = float(h) * _TWO_PI_OVER_2_64
                d = math.cos(ang) * (xf - dx) + math.sin(ang) * (yf - dy)
                if c == 0:
                    n00 = d
                elif c == 1:
                    n10 = d
                elif c == 2:
                    n01 = d
                else:
                    n11 = d
            nx0 = n00 + u * (n10 - n00)
            nx1 = n01 + u * (n11 - n01)
            total += amp * (nx0 + v * (nx1 - nx0))
            amp *= 0.5
            freq *= 2.0
        out[i] = total


def _hash2_np(xi: np.ndarray, yi: np.ndarray, seed: int) -> np.ndarray:
    """Vectorized lattice hash; xi, yi are int64 arrays."""
    hx = (xi.astype(np.int64).view(np.uint64) if xi.dtype == np.int64
          else xi.astype(np.int64).view(np.uint64))
    h = hx * np.uint64(_SM_GAMMA)
    h ^= yi.astype(np.int64).view(np.uint64) * np.uint64(_HASH_Y)
    h ^= np.uint64(seed & _MASK64)
    h = h + np.uint64(_SM_GAMMA)
    h = (h ^ (h >> np.uint64(30))) * np.uint64(_SM_M1)
    h = (h ^ (h >> np.uint64(27))) * np.uint64(_SM_M2)
    return h ^ (h >> np.uint64(31))


def _perlin_numpy(x, y, octaves, amplitude, scale, seed, out):
    total = np.zeros_like(x)
    amp = amplitude
    freq = 1.0 / scale
    for k in range(octaves):
        px = x * freq
        py = y * freq
        x0 = np.floor(px)
        y0 = np.floor(py)
        xi = x0.astype(np.int64)
        yi = y0.astype(np.int64)
        xf = px - x0
        yf = py - y0
        u = xf * xf * xf * (xf * (xf * 6.0 - 15.0) + 10.0)
        v = yf * yf * yf * (yf * (yf * 6.0 - 15.0) + 10.0)
        sk = (seed + k) & _MASK64
        dots = []
        for dy in (0, 1):
            for dx in (0, 1):
                h = _hash2_np(xi + dx, yi + dy, sk)
                ang = h.astype(np.float64) * _TWO_PI_OVER_2_64
                dots.append(np.cos(ang) * (xf - dx) + np.sin(ang) * (yf - dy))
        n00, n10, n01, n11 = dots
        nx0 = n00 + u * (n10 - n00)
        nx1 = n01 + u * (n11 - n01)
        total += amp * (nx0 + v * (nx1 - nx0))
        amp *= 0.5
        freq *= 2.0
    out[:] = total


def perlin_points(x, y, octaves: int, amplitude: float, scale: float,
                  seed: int) -> np.ndarray:
    """Fractal Perlin noise at arbitrary points; deterministic in the seed.

    Octave k contributes with amplitude ``amplitude * 0.5**k`` and doubled
    frequency, so the output is bounded by ``amplitude * sum(0.5**k)``.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same shape")
    shape = x.shape
    xf = x.reshape(-1)
    yf = y.reshape(-1)
    out = np.empty_like(xf)
    seed = seed & _MASK64
    if amplitude == 0.0:
        out[:] = 0.0
    elif HAVE_NUMBA:
        # two's-complement view so the jitted kernel gets a valid int64
        seed_i = seed - (1 << 64) if seed >= (1 << 63) else seed
        _perlin_loop(xf, yf, octaves, amplitude, scale, seed_i, out)
    else:
        _perlin_numpy(xf, yf, octaves, amplitude, scale, seed, out)
    return out.reshape(shape)


# --------------------------------------------------------------------------
# Cylinder rasterizer
# --------------------------------------------------------------------------

@njit(cache=True)
def _raster_loop(xs, ys, zbuf, owner, nx, ny, nz,
                 ax, ay, az, bx, by, bz, rad):  # pragma: no cover
    nrow = ys.size
    ncol = xs.size
    pitch = xs[1] - xs[0] if ncol > 1 else 1.0
    for i in range(rad.size):
        r = rad[i]
        r2 = r * r
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        dz = bz[i] - az[i]
        len2 = dx * dx + dy * dy
        xmin = min(ax[i], bx[i]) - r
        xmax = max(ax[i], bx[i]) + r
        ymin = min(ay[i], by[i]) - r
        ymax = max(ay[i], by[i]) + r
        k0 = max(0, int((xmin - xs[0]) / pitch))
        k1 = min(ncol - 1, int((xmax - xs[0]) / pitch) + 1)
        # ys decreases with row index
        j0 = max(0, int((ys[0] - ymax) / pitch))
        j1 = min(nrow - 1, int((ys[0] - ymin) / pitch) + 1)
        for j in range(j0, j1 + 1):
            py = ys[j]
            for k in range(k0, k1 + 1):
                px = xs[k]
                if len2 > 0.0:
                    t = ((px - ax[i]) * dx + (py - ay[i]) * dy) / len2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                else:
                    t = 0.0
                cx = ax[i] + t * dx
                cy = ay[i] + t * dy
                ox = px - cx
                oy = py - cy
                s2 = ox * ox + oy * oy
                if s2 <= r2:
                    h = math.sqrt(r2 - s2)
                    zt = az[i] + t * dz + h
                    if zt > zbuf[j, k]:
                        zbuf[j, k] = zt
                        owner[j, k] = i
                        nx[j, k] = ox / r
                        ny[j, k] = oy / r
                        nz[j, k] = h / r


def _raster_numpy(xs, ys, zbuf, owner, nx, ny, nz,
                  ax, ay, az, bx, by, bz, rad):
    ncol = xs.size
    nrow = ys.size
    pitch = xs[1] - xs[0] if ncol > 1 else 1.0
    for i in range(rad.size):
        r = rad[i]
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        dz = bz[i] - az[i]
        len2 = dx * dx + dy * dy
        k0 = max(0, int((min(ax[i], bx[i]) - r - xs[0]) / pitch))
        k1 = min(ncol - 1, int((max(ax[i], bx[i]) + r - xs[0]) / pitch) + 1)
        j0 = max(0, int((ys[0] - (max(ay[i], by[i]) + r)) / pitch))
        j1 = min(nrow - 1, int((ys[0] - (min(ay[i], by[i]) - r)) / pitch) + 1)
        if k1 < k0 or j1 < j0:
            continue
        px = xs[k0:k1 + 1][None, :]
        py = ys[j0:j1 + 1][:, None]
        if len2 > 0.0:
            t = np.clip(((px - ax[i]) * dx + (py - ay[i]) * dy) / len2, 0.0, 1.0)
        else:
            t = np.zeros((j1 - j0 + 1, k1 - k0 + 1))
        cx = ax[i] + t * dx
        cy = ay[i] + t * dy
        ox = px - cx
        oy = py - cy
        s2 = ox * ox + oy * oy
        inside = s2 <= r * r
        h = np.sqrt(np.maximum(r * r - s2, 0.0))
        zt = az[i] + t * dz + h
        sub = (slice(j0, j1 + 1), slice(k0, k1 + 1))
        hit = inside & (zt > zbuf[sub])
        zbuf[sub][hit] = zt[hit]
        owner[sub][hit] = i
        nx[sub][hit] = (ox / r)[hit]
        ny[sub][hit] = (oy / r)[hit]
        nz[sub][hit] = (h / r)[hit]


def raster_cylinders(xs: np.ndarray, ys: np.ndarray, terrain_z: np.ndarray,
                     seg_a: np.ndarray, seg_b: np.ndarray,
                     radii: np.ndarray):
    """Z-buffered top-down rasterization of cylinders over a terrain field.

    ``xs`` holds the pixel-center x per column (increasing), ``ys`` the
    pixel-center y per row (decreasing), ``terrain_z`` the terrain height per
    pixel. ``seg_a``/``seg_b`` are (L, 3) 3D centerline endpoints. Returns
    ``(z_top, owner, normals)`` where ``owner`` is the log index per pixel or
    -1 for terrain, and ``normals`` is (H, W, 3) for log pixels.
    """
    nrow, ncol = terrain_z.shape
    zbuf = terrain_z.astype(np.float64).copy()
    owner = np.full((nrow, ncol), -1, dtype=np.int32)
    nx = np.zeros((nrow, ncol))
    ny = np.zeros((nrow, ncol))
    nz = np.ones((nrow, ncol))
    if radii.size:
        args = (
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(ys, dtype=np.float64),
            zbuf, owner, nx, ny, nz,
            np.ascontiguousarray(seg_a[:, 0], dtype=np.float64),
            np.ascontiguousarray(seg_a[:, 1], dtype=np.float64),
            np.ascontiguousarray(seg_a[:, 2], dtype=np.float64),
            np.ascontiguousarray(seg_b[:, 0], dtype=np.float64),
            np.ascontiguousarray(seg_b[:, 1], dtype=np.float64),
            np.ascontiguousarray(seg_b[:, 2], dtype=np.float64),
            np.ascontiguousarray(radii, dtype=np.float64),
        )
        if HAVE_NUMBA:
            _raster_loop(*args)
        else:
            _raster_numpy(*args)
    normals = np.stack([nx, ny, nz], axis=-1)
    return zbuf, owner, normals
