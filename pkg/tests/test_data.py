from pathlib import Path

import numpy as np
import pytest

from qconv.data import (FormatError, LabeledImageSet, load_cifar_batch,
                        load_idx, resize_area, resize_set, sample_subset,
                        save_cifar_batch, save_idx)
from qconv.synthdata import write_synthetic_cifar, write_synthetic_idx

FIXTURES = Path(__file__).parent / "fixtures"


class TestIdx:
    def test_good_pair(self):
        data = load_idx(FIXTURES / "idx_images_good.bin",
                        FIXTURES / "idx_labels_good.bin")
        assert data.images.shape == (2, 3, 3, 1)
        assert data.labels.tolist() == [5, 9]
        assert data.images[0, 0, 0, 0] == 0.0
        assert data.images[0, 0, 1, 0] == 28 / 255
        assert data.images[1].min() == data.images[1].max() == 1.0

    def test_bad_magic(self):
        with pytest.raises(FormatError, match="0x00000803"):
            load_idx(FIXTURES / "idx_images_bad_magic.bin",
                     FIXTURES / "idx_labels_good.bin")

    def test_count_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            load_idx(FIXTURES / "idx_images_good.bin",
                     FIXTURES / "idx_labels_count3.bin")

    def test_truncated(self):
        with pytest.raises(FormatError, match="truncated"):
            load_idx(FIXTURES / "idx_images_truncated.bin",
                     FIXTURES / "idx_labels_good.bin")

    def test_round_trip(self, tmp_path, rng):
        images = rng.integers(0, 256, (5, 4, 6), dtype=np.uint8)
        labels = rng.integers(0, 10, 5)
        save_idx(images, labels, tmp_path / "i.bin", tmp_path / "l.bin")
        back = load_idx(tmp_path / "i.bin", tmp_path / "l.bin")
        assert np.array_equal(back.images[..., 0] * 255, images)
        assert np.array_equal(back.labels, labels)
        # byte-identical second write
        save_idx((back.images * 255).astype(np.uint8), back.labels,
                 tmp_path / "i2.bin", tmp_path / "l2.bin")
        assert (tmp_path / "i.bin").read_bytes() == \
            (tmp_path / "i2.bin").read_bytes()
        assert (tmp_path / "l.bin").read_bytes() == \
            (tmp_path / "l2.bin").read_bytes()


class TestCifar:
    def test_good_batch(self):
        data = load_cifar_batch(FIXTURES / "cifar_good.bin")
        assert data.images.shape == (2, 32, 32, 3)
        assert data.labels.tolist() == [7, 3]
        assert np.all(data.images[0] == 0.0)
        assert np.allclose(data.images[1, :, :, 0], 10 / 255)
        assert np.allclose(data.images[1, :, :, 1], 20 / 255)
        assert np.all(data.images[1, :, :, 2] == 1.0)

    def test_bad_size(self):
        with pytest.raises(FormatError, match="3073"):
            load_cifar_batch(FIXTURES / "cifar_bad_size.bin")
        try:
            load_cifar_batch(FIXTURES / "cifar_bad_size.bin")
        except FormatError as e:
            assert e.offset == 3073

    def test_bad_label(self):
        with pytest.raises(FormatError, match="label"):
            load_cifar_batch(FIXTURES / "cifar_bad_label.bin")

    def test_round_trip(self, tmp_path, rng):
        images = rng.integers(0, 256, (4, 32, 32, 3), dtype=np.uint8)
        labels = rng.integers(0, 10, 4)
        save_cifar_batch(images, labels, tmp_path / "b.bin")
        back = load_cifar_batch(tmp_path / "b.bin")
        assert np.array_equal(back.images * 255, images)
        assert np.array_equal(back.labels, labels)
        save_cifar_batch((back.images * 255).astype(np.uint8), back.labels,
                         tmp_path / "b2.bin")
        assert (tmp_path / "b.bin").read_bytes() == \
            (tmp_path / "b2.bin").read_bytes()


class TestResizeArea:
    def test_constant_stays_constant(self):
        image = np.full((7, 5, 3), 0.37)
        out = resize_area(image, (3, 2))
        assert np.allclose(out, 0.37, atol=1e-12)

    def test_checkerboard_mean(self):
        image = np.array([[0.0, 1.0], [1.0, 0.0]])[:, :, None]
        assert resize_area(image, (1, 1))[0, 0, 0] == pytest.approx(0.5)

    def test_fractional_rectangles_match_per_pixel_oracle(self, rng):
        image = rng.uniform(0, 1, (32, 32, 3))
        out = resize_area(image, (10, 10))
        scale = 3.2

        def cell(i, j, c):  # independent weighted-sum oracle
            total = 0.0
            for r in range(32):
                ov_r = max(0.0, min((i + 1) * scale, r + 1) - max(i * scale, r))
                if ov_r == 0:
                    continue
                for k in range(32):
                    ov_c = max(0.0,
                               min((j + 1) * scale, k + 1) - max(j * scale, k))
                    if ov_c:
                        total += ov_r * ov_c * image[r, k, c]
            return total / scale ** 2

        for (i, j, c) in [(0, 0, 0), (3, 7, 1), (9, 9, 2), (5, 0, 0)]:
            assert out[i, j, c] == pytest.approx(cell(i, j, c), abs=1e-12)

    def test_mean_preserved_when_divisible(self, rng):
        image = rng.uniform(0, 1, (12, 8, 2))
        out = resize_area(image, (6, 4))
        for c in range(2):
            assert out[..., c].mean() == pytest.approx(image[..., c].mean(),
                                                       abs=1e-12)

    def test_upscale_rejected(self):
        with pytest.raises(ValueError, match="unsupported"):
            resize_area(np.zeros((4, 4, 1)), (8, 4))


class TestSubset:
    def _set(self, n=50):
        rng = np.random.default_rng(3)
        return LabeledImageSet(rng.uniform(size=(n, 2, 2, 1)),
                               rng.integers(0, 10, n), "t")

    def test_full_permutation(self):
        data = self._set()
        sub = sample_subset(data, 50, seed=1)
        assert sorted(map(tuple, sub.images.reshape(50, -1).tolist())) == \
            sorted(map(tuple, data.images.reshape(50, -1).tolist()))

    def test_seed_determinism(self):
        data = self._set()
        a = sample_subset(data, 20, seed=5)
        b = sample_subset(data, 20, seed=5)
        assert np.array_equal(a.images, b.images)
        assert np.array_equal(a.labels, b.labels)

    def test_no_duplicates_and_pairing(self):
        data = self._set(200)
        sub = sample_subset(data, 60, seed=9)
        flat = sub.images.reshape(60, -1)
        assert len({tuple(r) for r in flat.tolist()}) == 60
        for i in range(60):  # label still matches its image
            j = np.flatnonzero(
                (data.images.reshape(200, -1) == flat[i]).all(axis=1))[0]
            assert data.labels[j] == sub.labels[i]

    def test_too_large(self):
        with pytest.raises(ValueError, match="sample"):
            sample_subset(self._set(), 51, seed=0)


class TestSyntheticSets:
    def test_cifar_set_loads_and_balances(self, tmp_path):
        data = write_synthetic_cifar(tmp_path / "synth.bin", n=40, seed=1)
        assert data.images.shape == (40, 32, 32, 3)
        assert np.bincount(data.labels, minlength=10).tolist() == [4] * 10

    def test_idx_set_loads(self, tmp_path):
        data = write_synthetic_idx(tmp_path / "i.bin", tmp_path / "l.bin",
                                   n=20, seed=2, size=12)
        assert data.images.shape == (20, 12, 12, 1)

    def test_deterministic(self, tmp_path):
        a = write_synthetic_cifar(tmp_path / "a.bin", n=10, seed=4)
        write_synthetic_cifar(tmp_path / "b.bin", n=10, seed=4)
        assert (tmp_path / "a.bin").read_bytes() == \
            (tmp_path / "b.bin").read_bytes()
        assert np.ptp(a.images[0] - a.images[10 - 10]) == 0  # same sample

    def test_classes_visually_distinct_after_downscale(self, tmp_path):
        data = write_synthetic_cifar(tmp_path / "c.bin", n=100, seed=5)
        small = resize_set(data, (10, 10))
        means = np.stack([small.images[small.labels == k].mean(axis=(0, 1, 2))
                          for k in range(10)])
        # class mean colors should spread over a decent range
        assert np.ptp(means, axis=0).max() > 0.2


def test_labeled_set_validation():
    with pytest.raises(ValueError, match="images"):
        LabeledImageSet(np.zeros((2, 2, 2)), np.zeros(2, np.int64), "x")
    with pytest.raises(ValueError, match="labels"):
        LabeledImageSet(np.zeros((2, 2, 2, 1)), np.array([0, 11]), "x")
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        LabeledImageSet(np.full((1, 2, 2, 1), 1.2), np.zeros(1, np.int64), "x")
