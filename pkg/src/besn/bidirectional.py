"""Backward pass over the time-reversed input, alignment and pooling.

The backward reservoir consumes the reversed sequence with the same update
rule (and, by default, the same weights) as the forward one. Its trajectory
is re-reversed afterwards so that index t of both trajectories refers to
the same input frame, which makes the per-frame concatenation x_f(t) (+) x_b(t)
well defined. For classification a trajectory pair is reduced to a single
feature vector, forward block first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ReservoirConfig
from .reservoir import ReservoirWeights, init_weights, run_forward

AGGREGATION_MODES = ("final", "mean", "mean_plus_final")


@dataclass(frozen=True)
class BiStates:
    """Aligned forward/backward trajectories of one sequence.

    ``backward[t]`` is the state the backward reservoir held after consuming
    reversed-input position T-1-t, i.e. both arrays are indexed by the
    original frame number.
    """

    forward: np.ndarray
    backward: np.ndarray

    def __post_init__(self):
        if self.forward.shape != self.backward.shape:
            raise ValueError(
                f"trajectory shapes differ: {self.forward.shape} vs {self.backward.shape}"
            )

    @property
    def n_units_each(self) -> int:
        return self.forward.shape[1]

    @property
    def n_frames(self) -> int:
        return self.forward.shape[0]


def reverse_sequence(sequence: np.ndarray) -> np.ndarray:
    """Time-reversed copy of a T x D sequence: output[t] = input[T-1-t]."""
    sequence = np.asarray(sequence)
    if sequence.ndim != 2 or sequence.shape[0] == 0:
        raise ValueError(f"expected a non-empty T x D sequence, got shape {sequence.shape}")
    return np.ascontiguousarray(sequence[::-1])


def backward_weights_for(config: ReservoirConfig, input_dim: int) -> ReservoirWeights:
    """Independently seeded backward weights for the separate-weights ablation."""
    return init_weights(config.with_seed((config.seed + 1) % 2**64), input_dim)


def run_bidirectional(
    weights: ReservoirWeights,
    sequence: np.ndarray,
    config: ReservoirConfig,
    shared_weights: bool = True,
    backward_weights: ReservoirWeights | None = None,
    rng: np.random.Generator | None = None,
) -> BiStates:
    """Forward and backward trajectories of one sequence.

    With ``shared_weights`` (the default) both directions use the same
    weight set. Otherwise ``backward_weights`` is used for the reversed
    pass, constructed via :func:`backward_weights_for` when not supplied.
    When noise is enabled the forward pass consumes the rng stream first.
    """
    if shared_weights:
        w_b = weights
    elif backward_weights is not None:
        w_b = backward_weights
    else:
        w_b = backward_weights_for(config, weights.input_dim)

    forward = run_forward(weights, sequence, config, rng=rng)
    backward_raw = run_forward(w_b, reverse_sequence(sequence), config, rng=rng)
    return BiStates(forward=forward, backward=np.ascontiguousarray(backward_raw[::-1]))


def _pooled_block(states: np.ndarray, component: str, washout: int) -> np.ndarray:
    if component == "final":
        return states[-1]
    return states[washout:].mean(axis=0)


def aggregate(bi: BiStates, mode: str = "final", washout: int = 0) -> np.ndarray:
    """Reduce a trajectory pair to one feature vector.

    ``final`` concatenates the last state each direction reached after
    consuming its entire input (the backward direction's final state sits at
    alignment index 0 of the re-reversed trajectory). ``mean`` concatenates
    the per-direction time means; ``mean_plus_final`` concatenates mean then
    final. The forward block always precedes the backward block. ``washout``
    drops each direction's initial transient from the mean only.
    """
    if mode not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation mode {mode!r}; expected one of {AGGREGATION_MODES}")
    if not 0 <= washout < bi.n_frames:
        raise ValueError(f"washout must be in [0, {bi.n_frames}), got {washout}")

    # Per-direction trajectories on each direction's own clock: the backward
    # pass ran over the reversed input, so its own transient is the tail of
    # the re-reversed array.
    backward_raw = bi.backward[::-1]
    components = ["mean", "final"] if mode == "mean_plus_final" else [mode]
    blocks = []
    for component in components:
        blocks.append(_pooled_block(bi.forward, component, washout))
        blocks.append(_pooled_block(backward_raw, component, washout))
    return np.concatenate(blocks)


def aggregate_unidirectional(states: np.ndarray, mode: str = "final", washout: int = 0) -> np.ndarray:
    """Single-direction reduction; the degenerate no-backward-block case."""
    if mode not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation mode {mode!r}; expected one of {AGGREGATION_MODES}")
    if not 0 <= washout < states.shape[0]:
        raise ValueError(f"washout must be in [0, {states.shape[0]}), got {washout}")
    components = ["mean", "final"] if mode == "mean_plus_final" else [mode]
    return np.concatenate([_pooled_block(states, c, washout) for c in components])
