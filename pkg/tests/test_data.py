"""Tests for datasets, the IDX reader and synthetic threshold data."""

import struct

import numpy as np
import pytest

from src.ingestion.datasets import Dataset, DatasetError, stratified_subsample
from src.ingestion.parsers.idx import (
    IDXCountMismatchError,
    IDXMagicError,
    IDXParseError,
    IDXTruncatedError,
    load_idx,
    read_idx_labels,
    write_idx,
)
from src.ingestion.synthetic import ThresholdDistribution, gen_threshold_data, true_risk_threshold


@pytest.fixture
def idx_arrays():
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(12, 4, 3), dtype=np.uint8)
    labels = rng.integers(0, 10, size=12, dtype=np.uint8)
    return images, labels


class TestIDX:

    @pytest.mark.parametrize("compress", [False, True])
    def test_load(self, tmp_path, idx_arrays, compress):
        images, labels = idx_arrays
        write_idx(images, labels, tmp_path / "img", tmp_path / "lbl", compress=compress)
        ds = load_idx(tmp_path / "img", tmp_path / "lbl")

        assert ds.features.shape == (12, 12)
        assert ds.metadata == {'rows': 4, 'cols': 3}
        np.testing.assert_allclose(ds.features, images.reshape(12, 12) / 255.0)
        np.testing.assert_array_equal(ds.labels, labels)
        assert ds.features.min() >= 0.0 and ds.features.max() <= 1.0

    def test_magic_mismatch(self, tmp_path, idx_arrays):
        images, labels = idx_arrays
        write_idx(images, labels, tmp_path / "img", tmp_path / "lbl")
        with pytest.raises(IDXMagicError):
            load_idx(tmp_path / "lbl", tmp_path / "img")

    def test_truncated_payload(self, tmp_path, idx_arrays):
        images, labels = idx_arrays
        write_idx(images, labels, tmp_path / "img", tmp_path / "lbl")
        raw = (tmp_path / "img").read_bytes()
        (tmp_path / "img").write_bytes(raw[:-5])
        with pytest.raises(IDXTruncatedError):
            load_idx(tmp_path / "img", tmp_path / "lbl")

    def test_truncated_header(self, tmp_path):
        (tmp_path / "lbl").write_bytes(struct.pack(">I", 0x00000801))
        with pytest.raises(IDXTruncatedError):
            read_idx_labels(tmp_path / "lbl")

    def test_count_mismatch(self, tmp_path, idx_arrays):
        images, labels = idx_arrays
        write_idx(images, labels[:10], tmp_path / "img", tmp_path / "lbl")
        with pytest.raises(IDXCountMismatchError):
            load_idx(tmp_path / "img", tmp_path / "lbl")

    def test_missing_file(self, tmp_path):
        with pytest.raises(IDXParseError):
            read_idx_labels(tmp_path / "absent")


class TestDataset:

    def test_validation(self):
        with pytest.raises(DatasetError):
            Dataset(features=np.zeros((3, 2)), labels=np.zeros(2), n_classes=2)
        with pytest.raises(DatasetError):
            Dataset(features=np.zeros((2, 2)), labels=np.array([0, 2]), n_classes=2)

    def test_views_keep_global_indices(self, threshold_data):
        view = threshold_data.view(np.array([9, 3, 7, 1]))
        sub = view.subset(np.array([1, 3]))
        np.testing.assert_array_equal(sub.indices, [3, 1])
        np.testing.assert_array_equal(sub.X, threshold_data.features[[3, 1]])
        assert sub.universe == 400

    def test_view_out_of_range(self, threshold_data):
        with pytest.raises(DatasetError):
            threshold_data.view(np.array([400]))


class TestStratifiedSubsample:

    def test_proportions(self):
        labels = np.repeat(np.arange(3), [500, 300, 200])
        ds = Dataset(features=np.arange(1000.0), labels=labels, n_classes=3, provenance="toy")
        sub = stratified_subsample(ds, 100, seed=1)
        np.testing.assert_array_equal(np.bincount(sub.labels), [50, 30, 20])
        assert sub.metadata['subsample_size'] == 100

    def test_largest_remainder(self):
        labels = np.repeat(np.arange(3), [1, 1, 1])
        ds = Dataset(features=np.arange(3.0), labels=labels, n_classes=3)
        assert np.bincount(stratified_subsample(ds, 2, seed=0).labels, minlength=3).tolist() == [1, 1, 0]

    def test_deterministic(self, threshold_data):
        a = stratified_subsample(threshold_data, 50, seed=4)
        b = stratified_subsample(threshold_data, 50, seed=4)
        np.testing.assert_array_equal(a.features, b.features)

    def test_size_checked(self, threshold_data):
        with pytest.raises(DatasetError):
            stratified_subsample(threshold_data, 401, seed=0)


class TestThresholdData:

    def test_deterministic(self):
        dist = ThresholdDistribution(0.3, 0.2)
        a = gen_threshold_data(dist, 100, seed=5)
        b = gen_threshold_data(dist, 100, seed=5)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_noise_free_labels(self):
        ds = gen_threshold_data(ThresholdDistribution(0.3, 0.0), 500, seed=2)
        np.testing.assert_array_equal(ds.labels, (ds.features[:, 0] >= 0.3).astype(int))

    def test_noise_rate(self):
        ds = gen_threshold_data(ThresholdDistribution(0.5, 0.2), 20000, seed=3)
        flipped = ds.labels != (ds.features[:, 0] >= 0.5)
        assert flipped.mean() == pytest.approx(0.2, abs=0.015)

    def test_true_risk(self):
        dist = ThresholdDistribution(0.5, 0.1)
        assert true_risk_threshold(0.5, dist) == pytest.approx(0.1)
        assert true_risk_threshold(0.0, dist) == pytest.approx(0.5)
        np.testing.assert_allclose(true_risk_threshold(np.array([0.25, 1.0]), dist), [0.3, 0.5])
        with pytest.raises(DatasetError):
            true_risk_threshold(1.5, dist)

    def test_true_risk_matches_empirical(self):
        dist = ThresholdDistribution(0.4, 0.1)
        ds = gen_threshold_data(dist, 50000, seed=6)
        empirical = np.mean((ds.features[:, 0] >= 0.7) != ds.labels)
        assert empirical == pytest.approx(true_risk_threshold(0.7, dist), abs=0.01)

    def test_invalid_distribution(self):
        with pytest.raises(DatasetError):
            ThresholdDistribution(0.5, 0.5)
