"""Top-down rendering: pixel mapping, depth convention, instance masks."""

import numpy as np
import pytest

from grasplog import constants as C
from grasplog.render import ImageGrid, make_target_mask, render


class TestImageGrid:
    def test_pixel_centers(self):
        grid = ImageGrid(10, extent=5.0)
        assert grid.pitch == pytest.approx(0.5)
        x, y = grid.pixel_to_xy(0, 0)
        assert x == pytest.approx(0.25)
        assert y == pytest.approx(4.75)  # row 0 is the far (large-y) edge
        x, y = grid.pixel_to_xy(9, 9)
        assert x == pytest.approx(4.75)
        assert y == pytest.approx(0.25)

    def test_roundtrip(self):
        grid = ImageGrid(256)
        for j, k in [(0, 0), (10, 99), (255, 255), (128, 7)]:
            x, y = grid.pixel_to_xy(j, k)
            assert grid.xy_to_pixel(x, y) == (j, k)

    def test_axes_monotone(self):
        grid = ImageGrid(64)
        assert np.all(np.diff(grid.xs()) > 0)
        assert np.all(np.diff(grid.ys()) < 0)


class TestRender:
    def test_shapes_and_depth_convention(self, pile4):
        grid = ImageGrid(96)
        rgbd, masks = render(pile4, grid)
        assert rgbd.rgb.shape == (96, 96, 3)
        assert rgbd.depth.shape == (96, 96)
        assert rgbd.rgb.min() >= 0.0 and rgbd.rgb.max() <= 1.0
        # camera sits at the camera height looking straight down
        assert rgbd.depth.max() <= C.CAMERA_HEIGHT + 2 * C.TERRAIN_AMPLITUDE
        assert rgbd.depth.min() >= C.CAMERA_HEIGHT - 1.0

    def test_deterministic(self, pile4):
        grid = ImageGrid(64)
        a, _ = render(pile4, grid)
        b, _ = render(pile4, grid)
        np.testing.assert_array_equal(a.rgb, b.rgb)
        np.testing.assert_array_equal(a.depth, b.depth)

    def test_masks_cover_log_centers(self, pile4):
        grid = ImageGrid(128)
        _, masks = render(pile4, grid)
        assert masks.ids == pile4.log_ids
        covered = 0
        for log in pile4.logs:
            j, k = grid.xy_to_pixel(log.cx, log.cy)
            m = masks.mask_for(log.id)
            # the log center pixel belongs to this log unless occluded
            covered += m[j, k] > 0
        assert covered >= len(pile4.logs) - 1

    def test_masks_disjoint(self, pile4):
        _, masks = render(pile4, ImageGrid(96))
        total = masks.masks.astype(np.int32).sum(axis=0)
        assert total.max() <= 1

    def test_log_pixels_closer_than_ground(self, pile4):
        grid = ImageGrid(96)
        rgbd, masks = render(pile4, grid)
        any_log = masks.masks.max(axis=0) > 0
        ground_depth = rgbd.depth[~any_log]
        log_depth = rgbd.depth[any_log]
        assert log_depth.mean() < ground_depth.mean()


class TestTargetMask:
    def test_union(self, pile4):
        _, masks = render(pile4, ImageGrid(64))
        ids = pile4.log_ids[:2]
        tm = make_target_mask(masks, ids)
        expected = np.maximum(masks.mask_for(ids[0]), masks.mask_for(ids[1]))
        np.testing.assert_array_equal(tm, expected)

    def test_empty_target_rejected(self, pile4):
        _, masks = render(pile4, ImageGrid(64))
        with pytest.raises(ValueError):
            make_target_mask(masks, ())

    def test_unknown_id_rejected(self, pile4):
        _, masks = render(pile4, ImageGrid(64))
        with pytest.raises(KeyError):
            make_target_mask(masks, (99,))
