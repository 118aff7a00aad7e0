"""Keypoint-sequence file format, dataset loading, and synthetic data.

Sample files use the "KPS1" layout: 4 magic bytes, u32 frame count T,
u32 feature width D (both little-endian), then T*D little-endian float32
values in frame-major order. Missing markers are quiet NaNs. A dataset is
a JSON manifest listing sample paths with labels and train/val/test split
tags; paths are resolved relative to the manifest file.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError

log = logging.getLogger(__name__)

KPS_MAGIC = b"KPS1"
SPLITS = ("train", "val", "test")


class DatasetError(ValueError):
    """A sample file or manifest failed validation."""


class BadMagicError(DatasetError):
    pass


class UnsupportedVersionError(DatasetError):
    pass


class TruncatedFileError(DatasetError):
    pass


@dataclass
class KeypointSequence:
    """One sample: T frames of D joint coordinates plus its label."""

    frames: np.ndarray
    label: str
    sample_id: str
    fps_hint: float | None = None

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.frames.shape[1]


@dataclass
class ManifestEntry:
    path: str
    label: str
    split: str
    sample_id: str
    signer_id: str | None = None


@dataclass
class Manifest:
    feature_dim: int
    classes: list[str]
    entries: list[ManifestEntry]


@dataclass
class LoadedDataset:
    """Per-split samples in manifest order."""

    train: list[KeypointSequence]
    val: list[KeypointSequence]
    test: list[KeypointSequence]
    classes: list[str]
    feature_dim: int

    def split(self, name: str) -> list[KeypointSequence]:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}; expected one of {SPLITS}")
        return getattr(self, name)

    @property
    def n_samples(self) -> int:
        return len(self.train) + len(self.val) + len(self.test)


def write_sample(path, sample: KeypointSequence) -> None:
    """Write one sample as a KPS1 file (frames stored as float32)."""
    frames = np.ascontiguousarray(sample.frames, dtype="<f4")
    if frames.ndim != 2:
        raise ValueError(f"frames must be 2-d, got shape {frames.shape}")
    t, d = frames.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", KPS_MAGIC, t, d))
        fh.write(frames.tobytes())


def read_sample(path, label: str = "", sample_id: str | None = None) -> KeypointSequence:
    """Read one KPS1 file; frames come back as float32 with NaN markers intact."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12:
        raise TruncatedFileError(f"{path}: file shorter than the 12-byte header")
    magic, t, d = struct.unpack_from("<4sII", data)
    if magic != KPS_MAGIC:
        if magic[:3] == KPS_MAGIC[:3]:
            raise UnsupportedVersionError(
                f"{path}: version {magic!r} not supported (expected {KPS_MAGIC!r})"
            )
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    expected = 12 + 4 * t * d
    if len(data) < expected:
        raise TruncatedFileError(
            f"{path}: header claims {t}x{d} frames ({expected} bytes) but file has {len(data)}"
        )
    if len(data) > expected:
        raise DatasetError(f"{path}: {len(data) - expected} bytes of trailing data")
    frames = np.frombuffer(data, dtype="<f4", offset=12).reshape(t, d).copy()
    return KeypointSequence(
        frames=frames,
        label=label,
        sample_id=sample_id if sample_id is not None else path.stem,
    )


def clean_sequence(raw, label: str = "", sample_id: str = "") -> KeypointSequence:
    """Resolve missing markers so every entry is finite.

    Interior gaps are linearly interpolated per feature; leading/trailing
    gaps take the nearest observed value; features missing in all frames
    become 0. Idempotent on already-clean input.
    """
    if isinstance(raw, KeypointSequence):
        label = label or raw.label
        sample_id = sample_id or raw.sample_id
        frames = np.array(raw.frames, dtype=np.float64)
        fps_hint = raw.fps_hint
    else:
        frames = np.array(raw, dtype=np.float64)
        fps_hint = None
    if frames.ndim != 2:
        raise DatasetError(f"sample {sample_id or '<raw>'}: frames must be 2-d")
    if frames.shape[0] < 2:
        raise DatasetError(
            f"sample {sample_id or '<raw>'}: only {frames.shape[0]} frame(s), need at least 2"
        )

    t = frames.shape[0]
    positions = np.arange(t)
    for j in range(frames.shape[1]):
        column = frames[:, j]
        observed = np.isfinite(column)
        if observed.all():
            continue
        if not observed.any():
            frames[:, j] = 0.0
            continue
        # np.interp holds the first/last observed value across the edges
        frames[:, j] = np.interp(positions, positions[observed], column[observed])
    return KeypointSequence(frames=frames, label=label, sample_id=sample_id, fps_hint=fps_hint)


def load_manifest(manifest_path) -> Manifest:
    """Parse and validate a dataset manifest (without touching sample files)."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DatasetError(f"manifest not found: {manifest_path}")
    try:
        payload = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{manifest_path}: invalid JSON ({exc})") from exc

    for key in ("feature_dim", "classes", "entries"):
        if key not in payload:
            raise DatasetError(f"{manifest_path}: missing manifest key {key!r}")
    classes = list(payload["classes"])
    if len(set(classes)) != len(classes):
        raise DatasetError(f"{manifest_path}: duplicate class names")

    entries = []
    seen_paths: set[str] = set()
    seen_ids: set[str] = set()
    for i, item in enumerate(payload["entries"]):
        where = f"{manifest_path} entry {i}"
        for key in ("path", "label", "split"):
            if key not in item:
                raise DatasetError(f"{where}: missing key {key!r}")
        if item["split"] not in SPLITS:
            raise DatasetError(
                f"{where} ({item['path']}): unknown split tag {item['split']!r}"
            )
        if item["label"] not in classes:
            raise DatasetError(
                f"{where} ({item['path']}): label {item['label']!r} not in class list"
            )
        if item["path"] in seen_paths:
            raise DatasetError(f"{where}: duplicate path {item['path']!r}")
        sample_id = item.get("id", Path(item["path"]).stem)
        if sample_id in seen_ids:
            raise DatasetError(f"{where}: duplicate sample id {sample_id!r}")
        seen_paths.add(item["path"])
        seen_ids.add(sample_id)
        entries.append(
            ManifestEntry(
                path=item["path"],
                label=item["label"],
                split=item["split"],
                sample_id=sample_id,
                signer_id=item.get("signer_id"),
            )
        )
    return Manifest(feature_dim=int(payload["feature_dim"]), classes=classes, entries=entries)


def load_dataset(manifest_path) -> LoadedDataset:
    """Load, clean and validate every sample listed in a manifest.

    Samples that end up shorter than 2 frames are rejected with a warning
    and skipped; everything else fails loudly with the offending entry
    named. Ordering within each split follows the manifest.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent

    splits: dict[str, list[KeypointSequence]] = {name: [] for name in SPLITS}
    for entry in manifest.entries:
        sample_path = root / entry.path
        if not sample_path.exists():
            raise DatasetError(f"missing sample file: {sample_path} (entry {entry.sample_id})")
        sample = read_sample(sample_path, label=entry.label, sample_id=entry.sample_id)
        if sample.feature_dim != manifest.feature_dim:
            raise DatasetError(
                f"{sample_path}: feature dim {sample.feature_dim} does not match "
                f"manifest feature_dim {manifest.feature_dim}"
            )
        try:
            cleaned = clean_sequence(sample)
        except DatasetError as exc:
            log.warning("rejecting sample %s: %s", entry.sample_id, exc)
            continue
        splits[entry.split].append(cleaned)

    present = {s.label for s in splits["train"]}
    for cls in manifest.classes:
        if cls not in present:
            raise DatasetError(f"class {cls!r} absent from train split")
    return LoadedDataset(
        train=splits["train"],
        val=splits["val"],
        test=splits["test"],
        classes=manifest.classes,
        feature_dim=manifest.feature_dim,
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Prefix/suffix gesture task for desk-scale verification.

    Each class is a (prefix motif, suffix motif) pair; a sample is the noisy
    prefix, a mean-reverting random-walk filler, then the noisy suffix. The
    class evidence sits at both sequence ends, so a single forward reservoir
    read out at its final state forgets the prefix while the bidirectional
    pair keeps both.
    """

    n_classes: int = 9
    samples_per_class: int = 60
    t_min: int = 40
    t_max: int = 60
    feature_dim: int = 8
    motif_length: int = 10
    noise_std: float = 0.05
    seed: int = 7

    def __post_init__(self):
        if self.n_classes < 2:
            raise ConfigError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.samples_per_class < 1:
            raise ConfigError(f"samples_per_class must be >= 1, got {self.samples_per_class}")
        if self.feature_dim < 1:
            raise ConfigError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if self.motif_length < 1:
            raise ConfigError(f"motif_length must be >= 1, got {self.motif_length}")
        if not 2 <= self.t_min <= self.t_max:
            raise ConfigError(f"need 2 <= t_min <= t_max, got [{self.t_min}, {self.t_max}]")
        if 2 * self.motif_length > self.t_min:
            raise ConfigError(
                f"motif_length {self.motif_length} too long: prefix and suffix "
                f"({2 * self.motif_length} frames) must fit in t_min {self.t_min}"
            )
        if self.noise_std < 0:
            raise ConfigError(f"noise_std must be >= 0, got {self.noise_std}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        self.motif_grid()  # validates factorization

    def motif_grid(self) -> tuple[int, int]:
        """Factor n_classes into (prefix count, suffix count), near-square."""
        for a in range(int(np.sqrt(self.n_classes)), 0, -1):
            if self.n_classes % a == 0:
                b = self.n_classes // a
                if a == 1 and b > 1:
                    raise ConfigError(
                        f"n_classes={self.n_classes} is prime; it cannot be split into "
                        "prefix x suffix motifs (use a composite count such as 4, 6 or 9)"
                    )
                return a, b
        raise ConfigError(f"cannot factor n_classes={self.n_classes}")


def synthetic_class_labels(spec: SyntheticSpec) -> list[str]:
    n_prefix, n_suffix = spec.motif_grid()
    return [f"p{i}s{j}" for i in range(n_prefix) for j in range(n_suffix)]


def generate_synthetic(spec: SyntheticSpec) -> LoadedDataset:
    """Deterministically generate the labeled prefix/suffix dataset.

    Splits are stratified 70/15/15 per class (15% shares rounded, train
    takes the remainder). All randomness comes from one PCG64(spec.seed)
    stream with a fixed draw order.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n_prefix, n_suffix = spec.motif_grid()
    d = spec.feature_dim
    length = spec.motif_length
    prefixes = rng.uniform(-1.0, 1.0, size=(n_prefix, length, d))
    suffixes = rng.uniform(-1.0, 1.0, size=(n_suffix, length, d))

    n_eval = round(0.15 * spec.samples_per_class)
    n_train = spec.samples_per_class - 2 * n_eval
    if n_train < 1:
        raise ConfigError(
            f"samples_per_class={spec.samples_per_class} leaves no training samples"
        )

    splits: dict[str, list[KeypointSequence]] = {name: [] for name in SPLITS}
    for p in range(n_prefix):
        for q in range(n_suffix):
            label = f"p{p}s{q}"
            for k in range(spec.samples_per_class):
                t = int(rng.integers(spec.t_min, spec.t_max + 1))
                prefix = prefixes[p] + rng.normal(0.0, spec.noise_std, size=(length, d))
                suffix = suffixes[q] + rng.normal(0.0, spec.noise_std, size=(length, d))
                # full-amplitude random walk, reflected into [-1, 1]: strong
                # enough to overwrite the prefix in a fading-memory reservoir
                filler = np.empty((t - 2 * length, d))
                x = prefix[-1].copy()
                steps = rng.normal(0.0, 0.35, size=(t - 2 * length, d))
                for i in range(filler.shape[0]):
                    x = x + steps[i]
                    x = np.where(x > 1.0, 2.0 - x, x)
                    x = np.where(x < -1.0, -2.0 - x, x)
                    np.clip(x, -1.0, 1.0, out=x)
                    filler[i] = x
                frames = np.vstack([prefix, filler, suffix])
                if k < n_train:
                    split = "train"
                elif k < n_train + n_eval:
                    split = "val"
                else:
                    split = "test"
                splits[split].append(
                    KeypointSequence(
                        frames=frames, label=label, sample_id=f"{label}-{k:03d}"
                    )
                )
    return LoadedDataset(
        train=splits["train"],
        val=splits["val"],
        test=splits["test"],
        classes=synthetic_class_labels(spec),
        feature_dim=d,
    )


def write_dataset(dataset: LoadedDataset, out_dir) -> Path:
    """Write a dataset as KPS1 files plus manifest.json; returns the manifest path.

    Repeated writes of the same dataset produce byte-identical directories.
    """
    out_dir = Path(out_dir)
    samples_dir = out_dir / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for split in SPLITS:
        for sample in dataset.split(split):
            rel = f"samples/{sample.sample_id}.kps"
            write_sample(out_dir / rel, sample)
            entries.append(
                {"path": rel, "label": sample.label, "split": split, "id": sample.sample_id}
            )
    manifest = {
        "feature_dim": dataset.feature_dim,
        "classes": list(dataset.classes),
        "entries": entries,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path
