"""Fixed random reservoir construction and leaky-tanh state updates.

The recurrent and input weights are drawn once from a seeded PCG64 stream
and never trained. A state trajectory is produced by iterating

    x(t+1) = (1 - alpha) * x(t) + alpha * tanh(W_r x(t) + W_in u(t) + b)

from x(0) = 0 over the input frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .config import ConfigError, ReservoirConfig

POWER_ITERATION_MAX = 1000
POWER_ITERATION_TOL = 1e-6


def estimate_spectral_radius(
    matrix,
    max_iterations: int = POWER_ITERATION_MAX,
    tol: float = POWER_ITERATION_TOL,
    block_size: int = 10,
) -> float:
    """Largest absolute eigenvalue of a square matrix, by block power iteration.

    Random recurrent matrices have complex dominant pairs whose moduli often
    cluster within a fraction of a percent, so scalar power iteration can
    oscillate indefinitely. Iterating an orthonormal block of ``block_size``
    vectors and reading the radius off the Ritz values V' A V keeps a whole
    cluster inside the block and converges geometrically. Returns 0.0 for
    the zero matrix. Accepts dense arrays or scipy sparse matrices.
    """
    if sparse.issparse(matrix):
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"matrix must be square, got shape {matrix.shape}")
        if matrix.nnz and not np.isfinite(matrix.data).all():
            raise ValueError("matrix has non-finite entries")
        if matrix.nnz == 0:
            return 0.0
    else:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"matrix must be square, got shape {matrix.shape}")
        if not np.isfinite(matrix).all():
            raise ValueError("matrix has non-finite entries")
        if not matrix.any():
            return 0.0

    n = matrix.shape[0]
    p = min(block_size, n)
    rng = np.random.Generator(np.random.PCG64(0x5EED))
    basis, _ = np.linalg.qr(rng.standard_normal((n, p)))

    estimate = 0.0
    previous = np.inf
    stable = 0
    for _ in range(max_iterations):
        image = matrix @ basis
        ritz = basis.T @ image
        estimate = float(np.abs(np.linalg.eigvals(ritz)).max())
        if abs(estimate - previous) <= tol * max(estimate, 1e-300):
            stable += 1
            if stable >= 3:
                return estimate
        else:
            stable = 0
        previous = estimate
        basis, _ = np.linalg.qr(image)
    return estimate


@dataclass(frozen=True)
class ReservoirWeights:
    """Immutable weight set of one reservoir direction.

    Attributes:
        w_r: n_units x n_units sparse recurrent matrix, rescaled to the
            configured spectral radius.
        w_in: n_units x input_dim dense input matrix.
        b: length-n_units bias vector.
        input_dim: expected input frame width.
        achieved_spectral_radius: re-estimated radius after rescaling.
    """

    w_r: sparse.csr_matrix
    w_in: np.ndarray
    b: np.ndarray
    input_dim: int
    achieved_spectral_radius: float

    @property
    def n_units(self) -> int:
        return self.b.shape[0]


def init_weights(config: ReservoirConfig, input_dim: int) -> ReservoirWeights:
    """Draw the fixed reservoir weights for ``config``.

    Draw order from the single PCG64(seed) stream is fixed: recurrent
    positions, recurrent values (row-major over selected positions),
    input matrix, bias. The recurrent matrix is rescaled so its estimated
    spectral radius equals ``config.spectral_radius``.
    """
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    n = config.n_units
    rng = np.random.Generator(np.random.PCG64(config.seed))

    mask = rng.random((n, n)) < config.density
    values = rng.uniform(-1.0, 1.0, size=int(mask.sum()))
    w = np.zeros((n, n))
    w[mask] = values

    w_in = rng.uniform(-config.input_scaling, config.input_scaling, size=(n, input_dim))
    b = rng.uniform(-config.bias_scale, config.bias_scale, size=n)

    raw_radius = estimate_spectral_radius(w)
    if raw_radius == 0.0:
        raise ConfigError(
            "recurrent matrix has spectral radius 0 before rescaling; "
            f"density={config.density} selected no usable entries for "
            f"n_units={config.n_units}"
        )
    w *= config.spectral_radius / raw_radius
    achieved = estimate_spectral_radius(w)

    w_r = sparse.csr_matrix(w)
    for arr in (w_r.data, w_r.indices, w_r.indptr, w_in, b):
        arr.setflags(write=False)
    return ReservoirWeights(
        w_r=w_r,
        w_in=w_in,
        b=b,
        input_dim=input_dim,
        achieved_spectral_radius=achieved,
    )


def step(
    weights: ReservoirWeights,
    state: np.ndarray,
    input_frame: np.ndarray,
    leak_rate: float,
    noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """One leaky-tanh update from ``state`` under one input frame.

    Pure function of its inputs; when ``noise`` > 0 a uniform(-noise, noise)
    perturbation is drawn from the caller-supplied ``rng`` stream.
    """
    state = np.asarray(state, dtype=np.float64)
    input_frame = np.asarray(input_frame, dtype=np.float64)
    n = weights.n_units
    if state.shape != (n,):
        raise ValueError(f"state has shape {state.shape}, expected ({n},)")
    if input_frame.shape != (weights.input_dim,):
        raise ValueError(
            f"input frame has shape {input_frame.shape}, expected ({weights.input_dim},)"
        )
    new = (1.0 - leak_rate) * state + leak_rate * np.tanh(
        weights.w_r @ state + weights.w_in @ input_frame + weights.b
    )
    if noise > 0.0:
        if rng is None:
            raise ValueError("noise > 0 requires a caller-supplied rng")
        new = new + rng.uniform(-noise, noise, size=n)
    return new


def run_forward(
    weights: ReservoirWeights,
    sequence: np.ndarray,
    config: ReservoirConfig,
    rng: np.random.Generator | None = None,
    initial_state: np.ndarray | None = None,
) -> np.ndarray:
    """State trajectory over a T x input_dim sequence, from the zero state.

    Returns a T x n_units array whose row t is the state after consuming
    frame t. ``initial_state`` overrides x(0) = 0 (used by echo-state-property
    tests). With ``config.noise_level`` = 0 the result is deterministic.
    """
    sequence = np.asarray(sequence, dtype=np.float64)
    if sequence.ndim != 2:
        raise ValueError(f"sequence must be 2-d, got shape {sequence.shape}")
    if sequence.shape[0] == 0:
        raise ValueError("empty sequence")
    if sequence.shape[1] != weights.input_dim:
        raise ValueError(
            f"sequence width {sequence.shape[1]} does not match input_dim {weights.input_dim}"
        )
    if not np.isfinite(sequence).all():
        raise ValueError("sequence has non-finite entries")

    n = weights.n_units
    if initial_state is None:
        x = np.zeros(n)
    else:
        x = np.array(initial_state, dtype=np.float64)
        if x.shape != (n,):
            raise ValueError(f"initial_state has shape {x.shape}, expected ({n},)")

    alpha = config.leak_rate
    noise = config.noise_level
    if noise > 0.0 and rng is None:
        raise ValueError("noise_level > 0 requires a caller-supplied rng")

    # Input projections for all frames at once; the recurrence itself
    # cannot be batched.
    projected = sequence @ weights.w_in.T + weights.b
    w_r = weights.w_r
    states = np.empty((sequence.shape[0], n))
    for t in range(sequence.shape[0]):
        x = (1.0 - alpha) * x + alpha * np.tanh(w_r @ x + projected[t])
        if noise > 0.0:
            x = x + rng.uniform(-noise, noise, size=n)
        states[t] = x
    return states
