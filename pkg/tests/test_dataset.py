import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besn.config import ConfigError
from besn.dataset import (
    BadMagicError,
    DatasetError,
    KeypointSequence,
    SyntheticSpec,
    TruncatedFileError,
    UnsupportedVersionError,
    clean_sequence,
    generate_synthetic,
    load_dataset,
    load_manifest,
    read_sample,
    synthetic_class_labels,
    write_dataset,
    write_sample,
)


def random_frames(rng, t, d, nan_fraction=0.0):
    frames = rng.uniform(-1, 1, size=(t, d)).astype(np.float32)
    if nan_fraction:
        mask = rng.random(frames.shape) < nan_fraction
        frames[mask] = np.nan
    return frames


class TestKpsFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        frames = random_frames(rng, 50, 126, nan_fraction=0.1)
        sample = KeypointSequence(frames=frames, label="x", sample_id="s0")
        path = tmp_path / "s0.kps"
        write_sample(path, sample)
        back = read_sample(path, label="x")
        assert back.frames.tobytes() == frames.tobytes()
        assert back.sample_id == "s0"

    @settings(max_examples=40, deadline=None)
    @given(
        t=st.integers(1, 40),
        d=st.integers(1, 20),
        seed=st.integers(0, 2**32 - 1),
        nan_fraction=st.floats(0, 0.5),
    )
    def test_round_trip_property(self, tmp_path_factory, t, d, seed, nan_fraction):
        rng = np.random.default_rng(seed)
        frames = random_frames(rng, t, d, nan_fraction)
        path = tmp_path_factory.mktemp("kps") / "sample.kps"
        write_sample(path, KeypointSequence(frames=frames, label="", sample_id="s"))
        assert read_sample(path).frames.tobytes() == frames.tobytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.kps"
        path.write_bytes(b"XXXX" + struct.pack("<II", 1, 1) + b"\x00" * 4)
        with pytest.raises(BadMagicError, match="bad magic"):
            read_sample(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "v2.kps"
        path.write_bytes(b"KPS2" + struct.pack("<II", 1, 1) + b"\x00" * 4)
        with pytest.raises(UnsupportedVersionError, match="version"):
            read_sample(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.kps"
        path.write_bytes(b"KPS1" + struct.pack("<II", 100, 4) + b"\x00" * 10)
        with pytest.raises(TruncatedFileError, match="truncated|claims"):
            read_sample(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "stub.kps"
        path.write_bytes(b"KPS1\x01")
        with pytest.raises(TruncatedFileError, match="header"):
            read_sample(path)

    def test_trailing_data(self, tmp_path):
        path = tmp_path / "long.kps"
        path.write_bytes(b"KPS1" + struct.pack("<II", 1, 1) + b"\x00" * 8)
        with pytest.raises(DatasetError, match="trailing"):
            read_sample(path)


class TestCleanSequence:
    def test_interior_linear_interpolation(self):
        cleaned = clean_sequence(np.array([[1.0], [np.nan], [3.0]]))
        np.testing.assert_allclose(cleaned.frames, [[1.0], [2.0], [3.0]])

    def test_edge_nearest_fill(self):
        cleaned = clean_sequence(np.array([[np.nan], [5.0], [np.nan]]))
        np.testing.assert_allclose(cleaned.frames, [[5.0], [5.0], [5.0]])

    def test_fully_missing_column_zeros(self):
        raw = np.array([[np.nan, 1.0], [np.nan, 2.0]])
        cleaned = clean_sequence(raw)
        np.testing.assert_allclose(cleaned.frames, [[0.0, 1.0], [0.0, 2.0]])

    def test_too_short_rejected(self):
        with pytest.raises(DatasetError, match="at least 2"):
            clean_sequence(np.array([[1.0, 2.0]]))

    @settings(max_examples=30, deadline=None)
    @given(t=st.integers(2, 30), d=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
    def test_idempotent_and_finite(self, t, d, seed):
        rng = np.random.default_rng(seed)
        raw = random_frames(rng, t, d, nan_fraction=0.3)
        once = clean_sequence(raw)
        twice = clean_sequence(once)
        assert np.isfinite(once.frames).all()
        assert np.array_equal(once.frames, twice.frames)

    def test_preserves_metadata(self):
        sample = KeypointSequence(
            frames=np.array([[1.0], [np.nan]]), label="g", sample_id="id7", fps_hint=25.0
        )
        cleaned = clean_sequence(sample)
        assert (cleaned.label, cleaned.sample_id, cleaned.fps_hint) == ("g", "id7", 25.0)


def write_tiny_dataset(tmp_path, entries, classes=("a", "b"), feature_dim=2, frames=None):
    rng = np.random.default_rng(5)
    for entry in entries:
        if entry.get("skip_file"):
            continue
        f = frames if frames is not None else random_frames(rng, 4, feature_dim)
        write_sample(tmp_path / entry["path"], KeypointSequence(f, entry["label"], entry["path"]))
    manifest = {
        "feature_dim": feature_dim,
        "classes": list(classes),
        "entries": [{k: v for k, v in e.items() if k != "skip_file"} for e in entries],
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


class TestManifestLoading:
    def test_round_trip_load(self, tmp_path):
        entries = [
            {"path": "a0.kps", "label": "a", "split": "train"},
            {"path": "b0.kps", "label": "b", "split": "train"},
            {"path": "a1.kps", "label": "a", "split": "val"},
            {"path": "b1.kps", "label": "b", "split": "test"},
        ]
        ds = load_dataset(write_tiny_dataset(tmp_path, entries))
        assert [len(ds.train), len(ds.val), len(ds.test)] == [2, 1, 1]
        assert ds.classes == ["a", "b"]
        assert ds.train[0].sample_id == "a0"
        assert np.isfinite(ds.train[0].frames).all()

    def test_missing_file_named(self, tmp_path):
        entries = [
            {"path": "a0.kps", "label": "a", "split": "train"},
            {"path": "gone.kps", "label": "b", "split": "train", "skip_file": True},
        ]
        with pytest.raises(DatasetError, match="gone.kps"):
            load_dataset(write_tiny_dataset(tmp_path, entries))

    def test_unknown_split_tag(self, tmp_path):
        entries = [{"path": "a0.kps", "label": "a", "split": "dev"}]
        with pytest.raises(DatasetError, match="unknown split tag 'dev'"):
            load_dataset(write_tiny_dataset(tmp_path, entries, classes=("a",)))

    def test_duplicate_path(self, tmp_path):
        entries = [
            {"path": "a0.kps", "label": "a", "split": "train"},
            {"path": "a0.kps", "label": "a", "split": "val"},
        ]
        with pytest.raises(DatasetError, match="duplicate path"):
            load_dataset(write_tiny_dataset(tmp_path, entries, classes=("a",)))

    def test_duplicate_id(self, tmp_path):
        entries = [
            {"path": "x/a0.kps", "label": "a", "split": "train", "id": "s1"},
            {"path": "y/a0.kps", "label": "a", "split": "val", "id": "s1"},
        ]
        (tmp_path / "x").mkdir()
        (tmp_path / "y").mkdir()
        with pytest.raises(DatasetError, match="duplicate sample id"):
            load_dataset(write_tiny_dataset(tmp_path, entries, classes=("a",)))

    def test_dim_mismatch_named(self, tmp_path):
        entries = [{"path": "a0.kps", "label": "a", "split": "train"}]
        path = write_tiny_dataset(tmp_path, entries, classes=("a",), feature_dim=3)
        # file written with D=3 but manifest rewritten to claim 5
        manifest = json.loads(path.read_text())
        manifest["feature_dim"] = 5
        path.write_text(json.dumps(manifest))
        with pytest.raises(DatasetError, match="a0.kps.*feature dim 3"):
            load_dataset(path)

    def test_class_absent_from_train(self, tmp_path):
        entries = [
            {"path": "a0.kps", "label": "a", "split": "train"},
            {"path": "b0.kps", "label": "b", "split": "test"},
        ]
        with pytest.raises(DatasetError, match="'b' absent from train"):
            load_dataset(write_tiny_dataset(tmp_path, entries))

    def test_label_not_in_classes(self, tmp_path):
        entries = [{"path": "a0.kps", "label": "zz", "split": "train"}]
        with pytest.raises(DatasetError, match="label 'zz'"):
            load_dataset(write_tiny_dataset(tmp_path, entries, classes=("a",)))

    def test_wlasl100_shaped_manifest(self, tmp_path):
        # 100 classes with the published 1780/258/258 split sizes
        classes = [f"gloss{i:03d}" for i in range(100)]
        counts = {"train": 1780, "val": 258, "test": 258}
        frames = np.zeros((2, 2), dtype=np.float32)
        entries = []
        k = 0
        for split, total in counts.items():
            for i in range(total):
                label = classes[i % 100]
                path = f"s{k:05d}.kps"
                write_sample(tmp_path / path, KeypointSequence(frames, label, path))
                entries.append({"path": path, "label": label, "split": split})
                k += 1
        manifest = {"feature_dim": 2, "classes": classes, "entries": entries}
        manifest_path = tmp_path / "manifest.json"
        manifest_path.write_text(json.dumps(manifest))
        ds = load_dataset(manifest_path)
        assert [len(ds.train), len(ds.val), len(ds.test)] == [1780, 258, 258]
        assert len(ds.classes) == 100

    def test_too_short_sample_skipped_with_warning(self, tmp_path, caplog):
        entries = [
            {"path": "a0.kps", "label": "a", "split": "train"},
            {"path": "a1.kps", "label": "a", "split": "val"},
        ]
        path = write_tiny_dataset(tmp_path, entries, classes=("a",))
        write_sample(
            tmp_path / "a1.kps",
            KeypointSequence(np.zeros((1, 2), dtype=np.float32), "a", "a1"),
        )
        with caplog.at_level("WARNING"):
            ds = load_dataset(path)
        assert len(ds.val) == 0
        assert any("a1" in r.message for r in caplog.records)


class TestSyntheticGeneration:
    def test_default_counts_and_splits(self):
        ds = generate_synthetic(SyntheticSpec())
        assert ds.n_samples == 540
        assert [len(ds.train), len(ds.val), len(ds.test)] == [378, 81, 81]
        assert len(ds.classes) == 9
        assert all(40 <= s.n_frames <= 60 for s in ds.train)
        assert all(s.feature_dim == 8 for s in ds.train)

    def test_labels_balanced(self):
        ds = generate_synthetic(SyntheticSpec(n_classes=4, samples_per_class=20))
        for split, expected in (("train", 14), ("val", 3), ("test", 3)):
            counts = {}
            for s in ds.split(split):
                counts[s.label] = counts.get(s.label, 0) + 1
            assert set(counts.values()) == {expected}

    def test_deterministic_per_seed(self):
        a = generate_synthetic(SyntheticSpec(n_classes=4, samples_per_class=8))
        b = generate_synthetic(SyntheticSpec(n_classes=4, samples_per_class=8))
        for sa, sb in zip(a.train, b.train):
            assert sa.sample_id == sb.sample_id
            assert np.array_equal(sa.frames, sb.frames)

    def test_zero_noise_repeats_motifs(self):
        spec = SyntheticSpec(n_classes=4, samples_per_class=10, noise_std=0.0)
        ds = generate_synthetic(spec)
        by_label = {}
        for s in ds.train:
            by_label.setdefault(s.label, []).append(s)
        for label, samples in by_label.items():
            first = samples[0]
            for other in samples[1:]:
                np.testing.assert_array_equal(
                    first.frames[: spec.motif_length], other.frames[: spec.motif_length]
                )
                np.testing.assert_array_equal(
                    first.frames[-spec.motif_length :], other.frames[-spec.motif_length :]
                )

    def test_class_prototypes_distinct(self):
        spec = SyntheticSpec(noise_std=0.0)
        ds = generate_synthetic(spec)
        prototypes = {}
        for s in ds.train:
            if s.label not in prototypes:
                prototypes[s.label] = np.concatenate(
                    [s.frames[: spec.motif_length].ravel(), s.frames[-spec.motif_length :].ravel()]
                )
        labels = sorted(prototypes)
        gaps = [
            np.linalg.norm(prototypes[a] - prototypes[b])
            for i, a in enumerate(labels)
            for b in labels[i + 1 :]
        ]
        assert min(gaps) > 0

    def test_motif_too_long_names_field(self):
        with pytest.raises(ConfigError, match="motif_length"):
            SyntheticSpec(motif_length=25, t_min=40)

    def test_prime_class_count_rejected(self):
        with pytest.raises(ConfigError, match="prime"):
            SyntheticSpec(n_classes=5)

    def test_label_grid(self):
        assert synthetic_class_labels(SyntheticSpec(n_classes=6)) == [
            "p0s0",
            "p0s1",
            "p0s2",
            "p1s0",
            "p1s1",
            "p1s2",
        ]


class TestWriteDataset:
    def test_round_trip_through_disk(self, tmp_path):
        spec = SyntheticSpec(n_classes=4, samples_per_class=8, feature_dim=3)
        ds = generate_synthetic(spec)
        manifest_path = write_dataset(ds, tmp_path / "data")
        loaded = load_dataset(manifest_path)
        assert loaded.n_samples == ds.n_samples
        assert loaded.classes == ds.classes
        # float32 write quantizes; compare at float32 resolution
        np.testing.assert_allclose(
            loaded.train[0].frames, ds.train[0].frames, atol=1e-6
        )
        assert loaded.train[0].sample_id == ds.train[0].sample_id

    def test_byte_identical_regeneration(self, tmp_path):
        spec = SyntheticSpec(n_classes=4, samples_per_class=6)
        for name in ("one", "two"):
            write_dataset(generate_synthetic(spec), tmp_path / name)
        files_one = sorted((tmp_path / "one").rglob("*"))
        files_two = sorted((tmp_path / "two").rglob("*"))
        assert [f.name for f in files_one] == [f.name for f in files_two]
        for a, b in zip(files_one, files_two):
            if a.is_file():
                assert a.read_bytes() == b.read_bytes(), a.name

    def test_split_hygiene(self, tmp_path):
        ds = generate_synthetic(SyntheticSpec(n_classes=4, samples_per_class=8))
        ids = [s.sample_id for split in ("train", "val", "test") for s in ds.split(split)]
        assert len(ids) == len(set(ids))
