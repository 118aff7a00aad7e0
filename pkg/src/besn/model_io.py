"""Self-describing binary persistence for trained pipelines.

Layout (all integers and reals little-endian, reals 64-bit):

    magic "BESN", version u16,
    direction u8 (0=uni, 1=bi), aggregation u8 (0=final, 1=mean,
    2=mean_plus_final), shared_weights u8, washout u32, input_dim u32,
    n_units u32 (per direction), spectral_radius f64, input_scaling f64,
    leak_rate f64, density f64, bias_scale f64, noise_level f64, seed u64,
    lambda f64, n_classes u32, classes (u32 byte length + UTF-8 each),
    n_features u32, feature_mean f64[F], feature_std f64[F],
    w_out f64[C x (F+1)] row-major.

Reservoir weights are not stored: they are reconstructed bit-identically
from the persisted config and seed.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .bidirectional import AGGREGATION_MODES, backward_weights_for
from .config import ReservoirConfig
from .pipeline import StateFeaturizer, TrainedPipeline
from .readout import ReadoutModel
from .reservoir import init_weights

MODEL_MAGIC = b"BESN"
MODEL_VERSION = 1

_DIRECTIONS = ("uni", "bi")


class ModelFormatError(ValueError):
    """A model file is malformed or from an unsupported version."""


def save_pipeline(path, pipeline: TrainedPipeline) -> None:
    featurizer = pipeline.featurizer
    model = pipeline.model
    config = featurizer.config
    out = bytearray()
    out += struct.pack("<4sH", MODEL_MAGIC, MODEL_VERSION)
    out += struct.pack(
        "<BBBII",
        _DIRECTIONS.index(featurizer.direction),
        AGGREGATION_MODES.index(featurizer.agg),
        1 if featurizer.shared_weights else 0,
        config.washout,
        featurizer.weights.input_dim,
    )
    out += struct.pack(
        "<IddddddQd",
        config.n_units,
        config.spectral_radius,
        config.input_scaling,
        config.leak_rate,
        config.density,
        config.bias_scale,
        config.noise_level,
        config.seed,
        model.lam,
    )
    out += struct.pack("<I", len(model.classes))
    for name in model.classes:
        raw = name.encode("utf-8")
        out += struct.pack("<I", len(raw)) + raw
    n_features = model.n_features
    out += struct.pack("<I", n_features)
    out += np.ascontiguousarray(model.feature_mean, dtype="<f8").tobytes()
    out += np.ascontiguousarray(model.feature_std, dtype="<f8").tobytes()
    out += np.ascontiguousarray(model.w_out, dtype="<f8").tobytes()
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise ModelFormatError(f"{self.path}: truncated model file")
        values = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return values

    def take_array(self, count: int) -> np.ndarray:
        size = 8 * count
        if self.offset + size > len(self.data):
            raise ModelFormatError(f"{self.path}: truncated model file")
        arr = np.frombuffer(self.data, dtype="<f8", count=count, offset=self.offset).copy()
        self.offset += size
        return arr


def load_pipeline(path) -> TrainedPipeline:
    path = Path(path)
    reader = _Reader(path.read_bytes(), path)

    magic, version = reader.take("<4sH")
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: bad magic {magic!r}, not a model file")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported model version {version}")

    direction_code, agg_code, shared, washout, input_dim = reader.take("<BBBII")
    if direction_code >= len(_DIRECTIONS) or agg_code >= len(AGGREGATION_MODES):
        raise ModelFormatError(f"{path}: invalid direction/aggregation codes")
    (
        n_units,
        spectral_radius,
        input_scaling,
        leak_rate,
        density,
        bias_scale,
        noise_level,
        seed,
        lam,
    ) = reader.take("<IddddddQd")

    (n_classes,) = reader.take("<I")
    classes = []
    for _ in range(n_classes):
        (length,) = reader.take("<I")
        if reader.offset + length > len(reader.data):
            raise ModelFormatError(f"{path}: truncated model file")
        classes.append(reader.data[reader.offset : reader.offset + length].decode("utf-8"))
        reader.offset += length

    (n_features,) = reader.take("<I")
    feature_mean = reader.take_array(n_features)
    feature_std = reader.take_array(n_features)
    w_out = reader.take_array(n_classes * (n_features + 1)).reshape(n_classes, n_features + 1)
    if reader.offset != len(reader.data):
        raise ModelFormatError(f"{path}: {len(reader.data) - reader.offset} bytes of trailing data")
    if not np.isfinite(w_out).all():
        raise ModelFormatError(f"{path}: non-finite readout weights")

    config = ReservoirConfig(
        n_units=n_units,
        spectral_radius=spectral_radius,
        input_scaling=input_scaling,
        leak_rate=leak_rate,
        density=density,
        bias_scale=bias_scale,
        noise_level=noise_level,
        washout=washout,
        seed=seed,
    )
    direction = _DIRECTIONS[direction_code]
    weights = init_weights(config, input_dim)
    backward = None
    if direction == "bi" and not shared:
        backward = backward_weights_for(config, input_dim)
    featurizer = StateFeaturizer(
        config=config,
        direction=direction,
        agg=AGGREGATION_MODES[agg_code],
        shared_weights=bool(shared),
        weights=weights,
        backward_weights=backward,
    )
    if featurizer.feature_dim != n_features:
        raise ModelFormatError(
            f"{path}: stored feature width {n_features} does not match the "
            f"reconstructed pipeline width {featurizer.feature_dim}"
        )
    model = ReadoutModel(
        w_out=w_out,
        classes=tuple(classes),
        feature_mean=feature_mean,
        feature_std=feature_std,
        lam=lam,
    )
    return TrainedPipeline(featurizer=featurizer, model=model, shared_weights=bool(shared))
