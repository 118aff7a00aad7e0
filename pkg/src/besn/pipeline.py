"""End-to-end orchestration: features, training, evaluation, benchmarking.

A run is described by one :class:`RunConfig`. The total state width is held
fixed across directions: ``direction="uni"`` puts all units in one forward
reservoir, ``direction="bi"`` splits them half/half between the forward and
backward passes, so a 200-unit run compares 200 forward units against
100+100 bidirectional ones over an identical feature width.

All numbers in the results sections are reproducible: randomness flows from
the run seed, per-sample work is pure, and BLAS pools are pinned to one
thread during feature extraction so results do not depend on the worker
count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from threadpoolctl import threadpool_limits

from .bidirectional import (
    AGGREGATION_MODES,
    aggregate,
    aggregate_unidirectional,
    backward_weights_for,
    run_bidirectional,
)
from .config import ConfigError, ReservoirConfig
from .dataset import KeypointSequence, LoadedDataset
from .readout import EvalReport, ReadoutModel, evaluate, fit_ridge, predict
from .reservoir import ReservoirWeights, init_weights, run_forward

DIRECTIONS = ("uni", "bi")

# default sweep grid: 1e-6 .. 1e2, decade steps
DEFAULT_LAMBDA_GRID = tuple(10.0**e for e in range(-6, 3))


@dataclass(frozen=True)
class RunConfig:
    """Everything one training/evaluation run depends on."""

    direction: str = "bi"
    units: int = 200
    spectral_radius: float = 0.9
    input_scaling: float = 0.5
    leak_rate: float = 0.3
    density: float = 0.1
    bias_scale: float = 0.0
    noise_level: float = 0.0
    washout: int = 0
    agg: str = "final"
    lam: float = 1e-3
    lambda_grid: tuple[float, ...] | None = None
    seeds: int = 1
    seed: int = 0
    threads: int = 0  # 0 = available parallelism
    shared_weights: bool = True

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if self.units < 1:
            raise ConfigError(f"units must be >= 1, got {self.units}")
        if self.direction == "bi" and self.units % 2 != 0:
            raise ConfigError(
                f"direction=bi needs an even total unit count to split across "
                f"directions, got {self.units}"
            )
        if self.agg not in AGGREGATION_MODES:
            raise ConfigError(f"agg must be one of {AGGREGATION_MODES}, got {self.agg!r}")
        if self.lam <= 0:
            raise ConfigError(f"lambda must be > 0, got {self.lam}")
        if self.lambda_grid is not None and any(g <= 0 for g in self.lambda_grid):
            raise ConfigError("lambda_grid values must be > 0")
        if self.seeds < 1:
            raise ConfigError(f"seeds must be >= 1, got {self.seeds}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")

    def units_per_direction(self) -> int:
        return self.units if self.direction == "uni" else self.units // 2

    def reservoir_config(self, seed: int | None = None) -> ReservoirConfig:
        return ReservoirConfig(
            n_units=self.units_per_direction(),
            spectral_radius=self.spectral_radius,
            input_scaling=self.input_scaling,
            leak_rate=self.leak_rate,
            density=self.density,
            bias_scale=self.bias_scale,
            noise_level=self.noise_level,
            washout=self.washout,
            seed=self.seed if seed is None else seed,
        )


@dataclass(frozen=True)
class StateFeaturizer:
    """Fixed reservoir plus the reduction that turns a sequence into features."""

    config: ReservoirConfig
    direction: str
    agg: str
    shared_weights: bool
    weights: ReservoirWeights
    backward_weights: ReservoirWeights | None = None

    @classmethod
    def build(
        cls, run_config: RunConfig, input_dim: int, seed: int | None = None
    ) -> "StateFeaturizer":
        config = run_config.reservoir_config(seed)
        weights = init_weights(config, input_dim)
        backward = None
        if run_config.direction == "bi" and not run_config.shared_weights:
            backward = backward_weights_for(config, input_dim)
        return cls(
            config=config,
            direction=run_config.direction,
            agg=run_config.agg,
            shared_weights=run_config.shared_weights,
            weights=weights,
            backward_weights=backward,
        )

    @property
    def feature_dim(self) -> int:
        per_direction = self.config.n_units
        directions = 1 if self.direction == "uni" else 2
        components = 2 if self.agg == "mean_plus_final" else 1
        return per_direction * directions * components

    def _sample_rng(self, index: int) -> np.random.Generator | None:
        if self.config.noise_level <= 0:
            return None
        seq = np.random.SeedSequence(entropy=self.config.seed, spawn_key=(index,))
        return np.random.Generator(np.random.PCG64(seq))

    def features_for(
        self, frames: np.ndarray, rng: np.random.Generator | None = None
    ) -> np.ndarray:
        """One feature vector; noise is applied only when an rng is supplied."""
        config = self.config if rng is not None else replace(self.config, noise_level=0.0)
        if self.direction == "uni":
            states = run_forward(self.weights, frames, config, rng=rng)
            return aggregate_unidirectional(states, self.agg, config.washout)
        bi = run_bidirectional(
            self.weights,
            frames,
            config,
            shared_weights=self.shared_weights,
            backward_weights=self.backward_weights,
            rng=rng,
        )
        return aggregate(bi, self.agg, config.washout)

    def feature_matrix(
        self,
        samples: list[KeypointSequence],
        threads: int = 0,
        with_noise: bool = False,
    ) -> np.ndarray:
        """N x F features over ``samples``, in order, thread-count invariant.

        Per-step noise (training only) uses one generator per sample index,
        so results do not depend on which worker handles which sample.
        """
        if not samples:
            raise ValueError("no samples to featurize")
        noisy = with_noise and self.config.noise_level > 0

        def one(item):
            index, sample = item
            rng = self._sample_rng(index) if noisy else None
            return self.features_for(sample.frames, rng=rng)

        workers = threads if threads > 0 else (os.cpu_count() or 1)
        workers = min(workers, len(samples))
        # Pin BLAS pools so per-call accumulation order is fixed regardless
        # of worker count; parallelism comes from the sample pool instead.
        with threadpool_limits(limits=1, user_api="blas"):
            if workers <= 1:
                rows = [one(item) for item in enumerate(samples)]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    rows = list(pool.map(one, enumerate(samples)))
        return np.array(rows)


@dataclass
class TrainedPipeline:
    """A featurizer and the readout trained on top of it."""

    featurizer: StateFeaturizer
    model: ReadoutModel
    shared_weights: bool = True

    def predict_sequences(self, samples: list[KeypointSequence], threads: int = 0):
        features = self.featurizer.feature_matrix(samples, threads=threads)
        return predict(self.model, features)


def train_pipeline(
    dataset: LoadedDataset,
    run_config: RunConfig,
    seed: int | None = None,
) -> tuple[TrainedPipeline, dict]:
    """Train one run: reservoir features then a single closed-form ridge solve.

    When ``run_config.lambda_grid`` is set, the grid is swept against the
    validation split and the best accuracy wins (ties to the smaller
    lambda). Returns the trained pipeline and a training report whose
    ``timing`` section holds every wall clock measured.
    """
    if not dataset.train:
        raise ConfigError("dataset has an empty train split")
    featurizer = StateFeaturizer.build(run_config, dataset.feature_dim, seed)

    start = time.perf_counter()
    train_features = featurizer.feature_matrix(
        dataset.train, threads=run_config.threads, with_noise=True
    )
    feature_seconds = time.perf_counter() - start
    train_labels = [s.label for s in dataset.train]

    fit_start = time.perf_counter()
    sweep: list[dict] = []
    if run_config.lambda_grid:
        if not dataset.val:
            raise ConfigError("lambda_grid sweep needs a non-empty val split")
        val_features = featurizer.feature_matrix(dataset.val, threads=run_config.threads)
        val_labels = [s.label for s in dataset.val]
        best = None
        for lam in sorted(run_config.lambda_grid):
            candidate = fit_ridge(train_features, train_labels, lam, classes=dataset.classes)
            accuracy = evaluate(candidate, val_features, val_labels).accuracy
            sweep.append({"lambda": lam, "val_accuracy": accuracy})
            if best is None or accuracy > best[1]:
                best = (candidate, accuracy, lam)
        model, _, chosen = best
    else:
        chosen = run_config.lam
        model = fit_ridge(train_features, train_labels, chosen, classes=dataset.classes)
    fit_seconds = time.perf_counter() - fit_start

    used_seed = featurizer.config.seed
    report = {
        "seed": used_seed,
        "direction": run_config.direction,
        "units_total": run_config.units,
        "units_per_direction": run_config.units_per_direction(),
        "aggregation": run_config.agg,
        "lambda": chosen,
        "lambda_sweep": sweep,
        "epochs": 0,
        "solver": "single closed-form linear solve (penalized ridge normal equations)",
        "n_train": len(dataset.train),
        "feature_dim": featurizer.feature_dim,
        "timing": {
            "feature_seconds": feature_seconds,
            "fit_seconds": fit_seconds,
            "train_seconds": feature_seconds + fit_seconds,
        },
    }
    pipeline = TrainedPipeline(
        featurizer=featurizer, model=model, shared_weights=run_config.shared_weights
    )
    return pipeline, report


def evaluate_pipeline(
    pipeline: TrainedPipeline,
    samples: list[KeypointSequence],
    threads: int = 0,
    train_seconds: float = 0.0,
) -> EvalReport:
    """Featurize a split (noise off) and score it against its labels."""
    start = time.perf_counter()
    features = pipeline.featurizer.feature_matrix(samples, threads=threads)
    labels = [s.label for s in samples]
    report = evaluate(
        pipeline.model,
        features,
        labels,
        train_seconds=train_seconds,
        seed=pipeline.featurizer.config.seed,
    )
    report.wall_clock_eval_s = time.perf_counter() - start
    return report


def multi_seed_run(
    dataset: LoadedDataset,
    run_config: RunConfig,
    n_seeds: int | None = None,
    split: str = "test",
    seed_list: list[int] | None = None,
) -> tuple[dict, dict]:
    """Repeat train+eval over seeds base..base+n-1; only the reservoir varies.

    ``seed_list`` overrides the derived seed sequence (used for forcing
    repeated seeds in degenerate-SD checks). Returns (results, timing):
    results holds per-seed accuracies plus their mean and sample standard
    deviation (ddof=1; 0.0 for a single seed) and is fully deterministic;
    timing holds the wall clocks.
    """
    if seed_list is not None:
        seeds = list(seed_list)
    else:
        n = run_config.seeds if n_seeds is None else n_seeds
        if n < 1:
            raise ConfigError(f"need at least one seed, got {n}")
        seeds = [run_config.seed + k for k in range(n)]
    if not seeds:
        raise ConfigError("need at least one seed")

    per_seed = []
    train_seconds = []
    eval_seconds = []
    for seed in seeds:
        pipeline, train_report = train_pipeline(dataset, run_config, seed=seed)
        eval_report = evaluate_pipeline(
            pipeline,
            dataset.split(split),
            threads=run_config.threads,
            train_seconds=train_report["timing"]["train_seconds"],
        )
        per_seed.append(
            {
                "seed": seed,
                "lambda": train_report["lambda"],
                "accuracy": eval_report.accuracy,
            }
        )
        train_seconds.append(train_report["timing"]["train_seconds"])
        eval_seconds.append(eval_report.wall_clock_eval_s)

    accuracies = np.array([r["accuracy"] for r in per_seed])
    sd = float(accuracies.std(ddof=1)) if len(seeds) > 1 else 0.0
    results = {
        "direction": run_config.direction,
        "units_total": run_config.units,
        "units_per_direction": run_config.units_per_direction(),
        "aggregation": run_config.agg,
        "split": split,
        "seeds": seeds,
        "per_seed": per_seed,
        "accuracy_mean": float(accuracies.mean()),
        "accuracy_sd": sd,
        "single_seed_sd_is_degenerate": len(seeds) == 1,
    }
    timing = {
        "train_seconds_per_seed": train_seconds,
        "train_seconds_mean": float(np.mean(train_seconds)),
        "eval_seconds_per_seed": eval_seconds,
        "eval_seconds_mean": float(np.mean(eval_seconds)),
    }
    return results, timing


def benchmark_directions(dataset: LoadedDataset, run_config: RunConfig) -> dict:
    """Bidirectional vs unidirectional at equal total units, multi-seed.

    The returned report keeps every nondeterministic wall clock inside the
    ``timing`` section so the ``results`` section can be hashed for
    reproducibility checks.
    """
    rows = {}
    timing = {}
    for direction in ("bi", "uni"):
        config = replace(run_config, direction=direction)
        results, clocks = multi_seed_run(dataset, config)
        rows[direction] = results
        timing[direction] = clocks
    return {
        "results": {
            "task": {
                "classes": list(dataset.classes),
                "n_train": len(dataset.train),
                "n_val": len(dataset.val),
                "n_test": len(dataset.test),
                "feature_dim": dataset.feature_dim,
            },
            "config": {
                "units_total": run_config.units,
                "spectral_radius": run_config.spectral_radius,
                "input_scaling": run_config.input_scaling,
                "leak_rate": run_config.leak_rate,
                "density": run_config.density,
                "bias_scale": run_config.bias_scale,
                "noise_level": run_config.noise_level,
                "washout": run_config.washout,
                "aggregation": run_config.agg,
                "lambda": run_config.lam,
                "lambda_grid": list(run_config.lambda_grid) if run_config.lambda_grid else None,
                "base_seed": run_config.seed,
                "n_seeds": run_config.seeds,
                "shared_weights": run_config.shared_weights,
            },
            "bi": rows["bi"],
            "uni": rows["uni"],
        },
        "timing": timing,
    }


def format_accuracy_sd(mean: float, sd: float) -> str:
    """Render accuracy stats the way comparison tables report them: '57.71 ± 1.35'."""
    return f"{100 * mean:.2f} ± {100 * sd:.2f}"


def format_train_time(seconds: float) -> str:
    """Render seconds as zero-padded mm:ss (rounded)."""
    total = int(round(seconds))
    return f"{total // 60:02d}:{total % 60:02d}"


def render_benchmark_table(report: dict) -> str:
    """Plain-text uni-vs-bi comparison table."""
    results = report["results"]
    timing = report["timing"]
    header = f"{'method':<24}{'accuracy (%) ± SD':<22}{'training time (mm:ss)'}"
    lines = [header, "-" * len(header)]
    for direction, name in (("bi", "bi-ESN"), ("uni", "uni-ESN")):
        row = results[direction]
        units = (
            f"{row['units_per_direction']}+{row['units_per_direction']}"
            if direction == "bi"
            else f"{row['units_total']}"
        )
        acc = format_accuracy_sd(row["accuracy_mean"], row["accuracy_sd"])
        clock = format_train_time(timing[direction]["train_seconds_mean"])
        lines.append(f"{name + ' (' + units + ')':<24}{acc:<22}{clock}")
    return "\n".join(lines)
