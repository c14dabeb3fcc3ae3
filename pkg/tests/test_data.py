# tests/test_data.py

import struct

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import expit

from nevae.data import (
    Dataset,
    SyntheticSpec,
    binarize,
    dataset_fingerprint,
    load_idx,
    make_synthetic,
    read_idx,
    save_idx,
    subsample_per_class,
    synthetic_factors,
    synthetic_mapping,
    take_subset,
    write_idx,
)
from nevae.errors import BadMagicError, DatasetError, DimensionOverflowError, TruncatedFileError


def test_load_idx_round_trip(idx_files, tiny_dataset):
    images, labels = idx_files
    loaded = load_idx(images, labels)
    assert loaded.n == tiny_dataset.n and loaded.pixels == 16 and loaded.image_side == 4
    np.testing.assert_allclose(loaded.images, tiny_dataset.images, atol=0.5 / 255 + 1e-12)
    np.testing.assert_array_equal(loaded.labels, np.arange(tiny_dataset.n) % 4)


def test_idx_header_layout(tmp_path):
    path = write_idx(tmp_path / "a.idx", np.arange(24, dtype=np.uint8).reshape(2, 3, 4))
    blob = path.read_bytes()
    assert struct.unpack(">IIII", blob[:16]) == (0x803, 2, 3, 4)
    assert blob[16:] == bytes(range(24))


def test_bad_magic(tmp_path):
    path = write_idx(tmp_path / "labels.idx", np.zeros(5, dtype=np.uint8))
    with pytest.raises(BadMagicError):
        load_idx(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "short.idx"
    path.write_bytes(struct.pack(">IIII", 0x803, 2, 2, 2) + b"\x00" * 5)
    with pytest.raises(TruncatedFileError):
        read_idx(path, 0x803)


def test_truncated_header(tmp_path):
    path = tmp_path / "header.idx"
    path.write_bytes(struct.pack(">II", 0x803, 2))
    with pytest.raises(TruncatedFileError):
        read_idx(path, 0x803)


def test_dimension_overflow(tmp_path):
    path = tmp_path / "huge.idx"
    path.write_bytes(struct.pack(">IIII", 0x803, 65536, 65536, 2))
    with pytest.raises(DimensionOverflowError):
        read_idx(path, 0x803)


def test_label_count_mismatch(tmp_path):
    images = write_idx(tmp_path / "i.idx", np.zeros((3, 2, 2), dtype=np.uint8))
    labels = write_idx(tmp_path / "l.idx", np.zeros(2, dtype=np.uint8))
    with pytest.raises(DatasetError):
        load_idx(images, labels)


def test_idx_pixels_scale_to_unit_interval(tmp_path):
    path = write_idx(tmp_path / "px.idx", np.array([[[0, 255], [128, 0]]], dtype=np.uint8))
    loaded = load_idx(path)
    np.testing.assert_array_equal(loaded.images, [[0.0, 1.0, 128 / 255, 0.0]])
    assert loaded.image_side == 2


def test_save_idx_rejects_labels_beyond_a_byte(tmp_path, tiny_dataset):
    labelled = Dataset(images=tiny_dataset.images, labels=np.arange(tiny_dataset.n) + 250)
    with pytest.raises(DatasetError):
        save_idx(labelled, tmp_path / "i.idx", tmp_path / "l.idx")
    assert not (tmp_path / "i.idx").exists()


def test_dataset_rejects_out_of_range_pixels():
    with pytest.raises(ValidationError):
        Dataset(images=np.full((2, 4), 1.5))
    with pytest.raises(ValidationError):
        Dataset(images=[[0.0, np.nan], [0.5, 1.0]])
    with pytest.raises(ValidationError):
        Dataset(images=[[0.0, np.inf]])


def test_binarize_modes(tiny_dataset):
    hard = binarize(tiny_dataset)
    np.testing.assert_array_equal(hard.images, (tiny_dataset.images >= 0.5).astype(float))
    a = binarize(tiny_dataset, "stochastic", seed=4)
    b = binarize(tiny_dataset, "stochastic", seed=4)
    np.testing.assert_array_equal(a.images, b.images)
    assert set(np.unique(a.images)) <= {0.0, 1.0}


def test_binarize_threshold_examples(tiny_dataset):
    edge = binarize(Dataset(images=[[0.5, 0.4999, 0.0, 1.0]]))
    np.testing.assert_array_equal(edge.images, [[1.0, 0.0, 0.0, 1.0]])
    blank = binarize(Dataset(images=np.zeros((2, 4))))
    np.testing.assert_array_equal(blank.images, np.zeros((2, 4)))
    once = binarize(tiny_dataset)
    np.testing.assert_array_equal(binarize(once).images, once.images)


def test_subsample_per_class(idx_files):
    dataset = load_idx(*idx_files)
    sub = subsample_per_class(dataset, 3, seed=0)
    assert sub.n == 12
    assert np.all(np.bincount(sub.labels) == 3)
    with pytest.raises(DatasetError):
        subsample_per_class(Dataset(images=dataset.images), 3, seed=0)


def test_subsample_per_class_examples(idx_files):
    dataset = load_idx(*idx_files)
    # 64 items over 4 classes: 16 per class
    whole = subsample_per_class(dataset, 16, seed=0)
    np.testing.assert_array_equal(whole.images, dataset.images)
    assert subsample_per_class(dataset, 100, seed=0).n == dataset.n

    ten_classes = Dataset(images=np.tile(dataset.images[:1], (50, 1)), labels=np.arange(50) % 10)
    one_each = subsample_per_class(ten_classes, 1, seed=5)
    assert one_each.n == 10 and sorted(one_each.labels) == list(range(10))

    a = subsample_per_class(dataset, 5, seed=9)
    b = subsample_per_class(dataset, 5, seed=9)
    np.testing.assert_array_equal(a.images, b.images)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_take_subset_is_deterministic(tiny_dataset):
    a = take_subset(tiny_dataset, 10, seed=2)
    b = take_subset(tiny_dataset, 10, seed=2)
    np.testing.assert_array_equal(a.images, b.images)
    assert take_subset(tiny_dataset, 1000, seed=2).n == tiny_dataset.n


def test_fingerprint_tracks_content(tiny_dataset):
    same = Dataset(images=tiny_dataset.images.copy())
    assert dataset_fingerprint(same) == dataset_fingerprint(Dataset(images=tiny_dataset.images))
    changed = tiny_dataset.images.copy()
    changed[0, 0] = 1.0 - changed[0, 0]
    assert dataset_fingerprint(Dataset(images=changed)) != dataset_fingerprint(same)


def test_synthetic_data():
    spec = SyntheticSpec(intrinsic_dim=4, ambient_dim=784, n_samples=200, seed=1)
    data = make_synthetic(spec)
    assert data.images.shape == (200, 784)
    assert data.intrinsic_dim == 4 and data.image_side == 28
    np.testing.assert_array_equal(data.images, make_synthetic(spec).images)
    clean = make_synthetic(spec.model_copy(update={"noise_sigma": 0.0}))
    centred = clean.images - clean.images.mean(axis=0)
    variance = np.linalg.svd(centred, compute_uv=False) ** 2
    # The manifold is curved, but its leading k directions carry most of the variance.
    assert variance[:4].sum() / variance.sum() > 0.5
    assert synthetic_mapping(spec).shape == (4, 784)
    with pytest.raises(ValidationError):
        SyntheticSpec(intrinsic_dim=10, ambient_dim=10)


def test_synthetic_logits_have_rank_k():
    spec = SyntheticSpec(intrinsic_dim=5, ambient_dim=64, n_samples=300, noise_sigma=0.0, seed=2)
    logits = synthetic_factors(spec) @ synthetic_mapping(spec)
    assert np.linalg.matrix_rank(logits) == 5
    np.testing.assert_allclose(make_synthetic(spec).images, expit(logits))
