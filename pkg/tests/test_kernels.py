"""Hash and noise kernels: reference values, parity of both code paths."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grasplog import kernels

# First three outputs of the widely published splitmix64 reference
# implementation seeded with 0.
SPLITMIX64_FROM_ZERO = (
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
)


def test_splitmix64_reference_sequence():
    # the function folds in the golden-gamma increment, so output n of the
    # reference generator seeded with 0 is splitmix64(n * gamma)
    gamma = 0x9E3779B97F4A7C15
    outs = [kernels.splitmix64((n * gamma) & 0xFFFFFFFFFFFFFFFF)
            for n in range(3)]
    assert tuple(outs) == SPLITMIX64_FROM_ZERO


def test_splitmix64_range_and_determinism():
    for x in (0, 1, 2**63, 2**64 - 1, 123456789):
        a = kernels.splitmix64(x)
        assert 0 <= a < 2**64
        assert a == kernels.splitmix64(x)


@given(st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=200)
def test_splitmix64_no_fixed_point_collisions_nearby(x):
    # adjacent inputs must not collide (avalanche sanity, not a proof)
    assert kernels.splitmix64(x) != kernels.splitmix64((x + 1) % 2**64)


def test_derive_seed_distinct_streams():
    base = 42
    seen = {kernels.derive_seed(base, i) for i in range(100)}
    assert len(seen) == 100
    assert kernels.derive_seed(base, 1, 2) != kernels.derive_seed(base, 2, 1)
    assert kernels.derive_seed(base, 5) == kernels.derive_seed(base, 5)


class TestPerlin:
    def _grid(self, n=33):
        xs = np.linspace(0.0, 5.0, n)
        return np.meshgrid(xs, xs)

    def test_deterministic(self):
        xx, yy = self._grid()
        a = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, 9)
        b = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, 9)
        np.testing.assert_array_equal(a, b)

    def test_seed_changes_field(self):
        xx, yy = self._grid()
        a = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, 9)
        b = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, 10)
        assert np.abs(a - b).max() > 1e-4

    def test_amplitude_bound(self):
        xx, yy = self._grid(65)
        out = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, 3)
        # octave amplitudes 0.05 * (1 + 1/2 + 1/4 + 1/8), gradients unit
        assert np.abs(out).max() <= 0.05 * 1.875 + 1e-12

    def test_zero_amplitude_is_flat(self):
        xx, yy = self._grid(9)
        out = kernels.perlin_points(xx, yy, 4, 0.0, 1.0, 3)
        np.testing.assert_array_equal(out, 0.0)

    def test_continuity(self):
        # noise difference over a tiny step stays tiny
        x = np.linspace(0.3, 4.7, 200)
        y = np.full_like(x, 2.0)
        a = kernels.perlin_points(x, y, 4, 0.05, 1.0, 5)
        b = kernels.perlin_points(x + 1e-4, y, 4, 0.05, 1.0, 5)
        assert np.abs(a - b).max() < 1e-3

    def test_invalid_scale(self):
        with pytest.raises(ValueError):
            kernels.perlin_points(np.zeros(3), np.zeros(3), 4, 0.05, 0.0, 1)

    def test_paths_agree(self):
        xx, yy = self._grid(49)
        seeds = [0, 7, (1 << 63) + 12345, 2**64 - 1]
        for seed in seeds:
            saved = kernels.HAVE_NUMBA
            fast = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, seed)
            kernels.HAVE_NUMBA = False
            try:
                slow = kernels.perlin_points(xx, yy, 4, 0.05, 1.0, seed)
            finally:
                kernels.HAVE_NUMBA = saved
            np.testing.assert_allclose(fast, slow, atol=1e-12)


class TestRaster:
    def _scene(self):
        # 101 samples over [0, 5] so that y = 2.5 lands exactly on a row
        xs = np.linspace(0.0, 5.0, 101)
        ys = xs[::-1].copy()
        terrain = np.zeros((101, 101))
        seg_a = np.array([[1.0, 2.5, 0.1]])
        seg_b = np.array([[4.0, 2.5, 0.1]])
        radii = np.array([0.1])
        return xs, ys, terrain, seg_a, seg_b, radii

    def test_single_horizontal_log(self):
        xs, ys, terrain, a, b, r = self._scene()
        z, owner, normals = kernels.raster_cylinders(xs, ys, terrain, a, b, r)
        hit = owner >= 0
        assert hit.any()
        # crown height equals axis height plus radius
        assert z[hit].max() == pytest.approx(0.2, abs=1e-6)
        # off-log pixels keep the terrain height
        assert z[~hit].max() == 0.0
        # crown normals point straight up along the axis line
        jmid, kmid = np.argwhere(hit)[len(np.argwhere(hit)) // 2]
        assert normals.shape == (101, 101, 3)

    def test_zbuffer_prefers_upper_log(self):
        xs, ys, terrain, a, b, r = self._scene()
        a2 = np.vstack([a, [[2.5, 1.0, 0.4]]])
        b2 = np.vstack([b, [[2.5, 4.0, 0.4]]])
        r2 = np.array([0.1, 0.1])
        z, owner, _ = kernels.raster_cylinders(xs, ys, terrain, a2, b2, r2)
        # at the crossing point the higher log owns the pixel
        j = np.argmin(np.abs(ys - 2.5))
        k = np.argmin(np.abs(xs - 2.5))
        assert owner[j, k] == 1
        assert z[j, k] == pytest.approx(0.5, abs=1e-6)

    def test_paths_agree(self):
        xs, ys, terrain, a, b, r = self._scene()
        a2 = np.vstack([a, [[2.5, 1.0, 0.15]], [[0.5, 0.5, 0.05]]])
        b2 = np.vstack([b, [[2.5, 4.0, 0.15]], [[4.5, 4.5, 0.3]]])
        r2 = np.array([0.1, 0.08, 0.06])
        saved = kernels.HAVE_NUMBA
        fast = kernels.raster_cylinders(xs, ys, terrain, a2, b2, r2)
        kernels.HAVE_NUMBA = False
        try:
            slow = kernels.raster_cylinders(xs, ys, terrain, a2, b2, r2)
        finally:
            kernels.HAVE_NUMBA = saved
        for f, s in zip(fast, slow):
            np.testing.assert_allclose(f, s, atol=1e-12)
