"""Dataset layout, tensor format, subset enumeration, augmentation."""

import json
import os

import numpy as np
import pytest

from grasplog import constants as C
from grasplog.dataset import (augment, build_sample, enumerate_subsets,
                              generate_dataset, load_manifest, read_tensor,
                              subset_tag, write_tensor)
from grasplog.render import ImageGrid, render
from grasplog.scene import generate_pile


class TestTensorFormat:
    @pytest.mark.parametrize("arr", [
        np.arange(24, dtype=np.float32).reshape(2, 3, 4),
        np.zeros((5,), dtype=np.float32),
        (np.arange(12) % 2).astype(np.uint8).reshape(3, 4),
        np.float32(np.random.default_rng(0).normal(size=(4, 4, 4, 2))),
    ])
    def test_roundtrip(self, tmp_path, arr):
        path = str(tmp_path / "t.gmt")
        write_tensor(path, arr)
        back = read_tensor(path)
        assert back.dtype == arr.dtype
        np.testing.assert_array_equal(back, arr)

    def test_float64_narrowed_to_f32(self, tmp_path):
        path = str(tmp_path / "t.gmt")
        write_tensor(path, np.array([1.5, 2.25], dtype=np.float64))
        back = read_tensor(path)
        assert back.dtype == np.float32
        np.testing.assert_array_equal(back, [1.5, 2.25])

    def test_header_magic(self, tmp_path):
        path = str(tmp_path / "t.gmt")
        write_tensor(path, np.zeros(3, dtype=np.float32))
        with open(path, "rb") as fh:
            assert fh.read(4) == b"GMT1"

    def test_bad_magic_rejected(self, tmp_path):
        path = str(tmp_path / "bad.gmt")
        with open(path, "wb") as fh:
            fh.write(b"NOPE" + b"\x00" * 20)
        with pytest.raises(ValueError):
            read_tensor(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = str(tmp_path / "t.gmt")
        write_tensor(path, np.zeros((4, 4), dtype=np.float32))
        data = open(path, "rb").read()
        with open(path, "wb") as fh:
            fh.write(data[:-8])
        with pytest.raises(ValueError):
            read_tensor(path)

    def test_no_tmp_file_left(self, tmp_path):
        path = str(tmp_path / "t.gmt")
        write_tensor(path, np.zeros(3, dtype=np.float32))
        assert os.listdir(tmp_path) == ["t.gmt"]


class TestSubsets:
    def test_count_is_two_to_n_minus_one(self):
        for n in range(1, 6):
            subs = enumerate_subsets(range(n))
            assert len(subs) == 2**n - 1

    def test_order_size_then_lex(self):
        subs = enumerate_subsets([2, 0, 1])
        assert subs == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]

    def test_max_size_cap(self):
        subs = enumerate_subsets(range(6), max_size=2)
        assert all(len(s) <= 2 for s in subs)
        assert len(subs) == 6 + 15

    def test_tag(self):
        assert subset_tag((3, 1, 2)) == "1-2-3"


class TestAugment:
    def _sample(self):
        rng = np.random.default_rng(42)
        inp = rng.normal(size=(5, 8, 8))
        gm = rng.normal(size=(5, 8, 8))
        gm[3] = (gm[3] > 0).astype(float)
        return inp, gm

    def test_rot90_four_times_is_identity(self):
        inp, gm = self._sample()
        a, b = inp, gm
        for _ in range(4):
            a, b = augment(a, b, "rot90")
        np.testing.assert_allclose(a, inp, atol=1e-15)
        np.testing.assert_allclose(b, gm, atol=1e-15)

    def test_flip_twice_is_identity(self):
        inp, gm = self._sample()
        for op in ("flip_h", "flip_v"):
            a, b = augment(inp, gm, op)
            a, b = augment(a, b, op)
            np.testing.assert_allclose(a, inp, atol=1e-15)
            np.testing.assert_allclose(b, gm, atol=1e-15)

    def test_rot90_flips_angle_pair_sign(self):
        inp, gm = self._sample()
        _, out = augment(inp, gm, "rot90")
        np.testing.assert_allclose(out[0], -np.rot90(gm[0], axes=(-2, -1)))
        np.testing.assert_allclose(out[1], -np.rot90(gm[1], axes=(-2, -1)))
        np.testing.assert_allclose(out[3], np.rot90(gm[3], axes=(-2, -1)))

    def test_rot180_preserves_angles(self):
        inp, gm = self._sample()
        _, out = augment(inp, gm, "rot180")
        np.testing.assert_allclose(out[0], np.rot90(gm[0], 2, axes=(-2, -1)))

    def test_flip_negates_s_only(self):
        inp, gm = self._sample()
        _, out = augment(inp, gm, "flip_h")
        np.testing.assert_allclose(out[0], gm[0][..., :, ::-1])
        np.testing.assert_allclose(out[1], -gm[1][..., :, ::-1])

    def test_unknown_op(self):
        inp, gm = self._sample()
        with pytest.raises(ValueError):
            augment(inp, gm, "transpose")


class TestBuildSample:
    def test_shapes_and_channels(self):
        pile = generate_pile(3, 2)
        grid = ImageGrid(64)
        rgbd, masks = render(pile, grid)
        stack, gm, grasps = build_sample(pile, (0,), rgbd, masks, grid)
        assert stack.shape == (5, 64, 64)
        assert gm.stack().shape == (5, 64, 64)
        # input channel 4 is the target mask: binary, covering the target
        assert set(np.unique(stack[4])) <= {0.0, 1.0}
        for rec in grasps:
            assert rec["tau"] == 1
            assert C.W_MIN <= rec["w"] <= C.W_MAX


@pytest.fixture(scope="module")
def ds(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("ds"))
    manifest = generate_dataset(root, n_piles=3, logs_per_pile=3,
                                seed=77, resolution=48)
    return root, manifest


class TestGenerateDataset:
    def test_manifest_contents(self, ds):
        root, manifest = ds
        assert manifest["schema"] == C.DATASET_SCHEMA
        assert len(manifest["piles"]) == 3
        assert len(manifest["samples"]) == 3 * 7
        assert manifest["constants"]["W_MAX"] == C.W_MAX
        assert load_manifest(root) == manifest

    def test_layout_on_disk(self, ds):
        root, manifest = ds
        assert os.path.exists(os.path.join(root, "losses_golden.json"))
        for rec in manifest["samples"][:4]:
            sdir = os.path.join(root, "samples", rec["sample_id"])
            inp = read_tensor(os.path.join(sdir, "input.gmt"))
            tgt = read_tensor(os.path.join(sdir, "target.gmt"))
            assert inp.shape == (5, 48, 48)
            assert tgt.shape == (5, 48, 48)
            with open(os.path.join(sdir, "grasps.json")) as fh:
                grasps = json.load(fh)
            assert len(grasps["grasps"]) == rec["n_grasps"]

    def test_target_maps_well_formed(self, ds):
        root, manifest = ds
        for rec in manifest["samples"][:8]:
            tgt = read_tensor(os.path.join(root, "samples",
                                           rec["sample_id"], "target.gmt"))
            u = tgt[3]
            assert set(np.unique(u)) <= {0.0, 1.0}
            mask = u > 0.5
            if mask.any():
                norm = tgt[0][mask] ** 2 + tgt[1][mask] ** 2
                np.testing.assert_allclose(norm, 1.0, atol=1e-5)

    def test_splits_partition_piles(self, ds):
        _, manifest = ds
        by_pile = {}
        for rec in manifest["samples"]:
            by_pile.setdefault(rec["pile_id"], set()).add(rec["split"])
        for splits in by_pile.values():
            assert len(splits) == 1  # no pile straddles two splits

    def test_thread_determinism(self, tmp_path):
        a = str(tmp_path / "a")
        b = str(tmp_path / "b")
        generate_dataset(a, n_piles=2, logs_per_pile=2, seed=9,
                         resolution=32, threads=1)
        generate_dataset(b, n_piles=2, logs_per_pile=2, seed=9,
                         resolution=32, threads=2)
        for dirpath, _, files in os.walk(a):
            rel = os.path.relpath(dirpath, a)
            for name in files:
                fa = os.path.join(a, rel, name)
                fb = os.path.join(b, rel, name)
                assert open(fa, "rb").read() == open(fb, "rb").read(), name
