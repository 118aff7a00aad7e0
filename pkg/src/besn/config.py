"""Reservoir hyperparameter configuration."""

from __future__ import annotations

from dataclasses import dataclass, replace


class ConfigError(ValueError):
    """A hyperparameter or generator setting is out of range."""


@dataclass(frozen=True)
class ReservoirConfig:
    """Hyperparameters of one reservoir direction.

    Every downstream random draw (weight matrices, optional per-step state
    noise) derives from ``seed`` through a single PCG64 stream with a fixed
    fill order, so an identical config yields bit-identical weights on any
    platform.

    Attributes:
        n_units: reservoir size for this direction.
        spectral_radius: target largest |eigenvalue| of the recurrent matrix.
        input_scaling: half-width of the uniform input-weight entries.
        leak_rate: state-update speed, in [0, 1]; 1 means no leak memory.
        density: fraction of nonzero recurrent entries, in (0, 1].
        bias_scale: half-width of the uniform bias entries (0 disables bias).
        noise_level: half-width of uniform per-step state noise, training only.
        washout: initial states per direction ignored by mean pooling.
        seed: 64-bit unsigned seed for weight construction.
    """

    n_units: int = 100
    spectral_radius: float = 0.9
    input_scaling: float = 0.5
    leak_rate: float = 0.3
    density: float = 0.1
    bias_scale: float = 0.0
    noise_level: float = 0.0
    washout: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_units < 1:
            raise ConfigError(f"n_units must be >= 1, got {self.n_units}")
        if not self.spectral_radius > 0:
            raise ConfigError(
                f"spectral_radius must be > 0, got {self.spectral_radius}"
            )
        if self.input_scaling < 0:
            raise ConfigError(
                f"input_scaling must be >= 0, got {self.input_scaling}"
            )
        if not 0.0 <= self.leak_rate <= 1.0:
            raise ConfigError(f"leak_rate must be in [0, 1], got {self.leak_rate}")
        if not 0.0 < self.density <= 1.0:
            raise ConfigError(f"density must be in (0, 1], got {self.density}")
        if self.bias_scale < 0:
            raise ConfigError(f"bias_scale must be >= 0, got {self.bias_scale}")
        if self.noise_level < 0:
            raise ConfigError(f"noise_level must be >= 0, got {self.noise_level}")
        if self.washout < 0:
            raise ConfigError(f"washout must be >= 0, got {self.washout}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def with_seed(self, seed: int) -> "ReservoirConfig":
        return replace(self, seed=seed)
