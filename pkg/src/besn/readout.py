"""Ridge-regression readout: the only trained part of the pipeline.

Training is one closed-form linear solve of the penalized normal equations
on z-scored features with an unpenalized intercept; prediction is argmax
over per-class scores.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla


class NumericalError(RuntimeError):
    """A linear solve failed beyond recovery."""


@dataclass(frozen=True)
class ReadoutModel:
    """Trained linear readout plus the normalization fitted with it.

    ``w_out`` has one row per class over F z-scored feature columns plus a
    trailing intercept column.
    """

    w_out: np.ndarray
    classes: tuple[str, ...]
    feature_mean: np.ndarray
    feature_std: np.ndarray
    lam: float

    @property
    def n_features(self) -> int:
        return self.w_out.shape[1] - 1


@dataclass
class EvalReport:
    """Per-split evaluation metrics with timing kept separate from scores."""

    accuracy: float
    per_class_accuracy: dict[str, float]
    confusion: np.ndarray  # rows = true class, columns = predicted class
    n_samples: int
    wall_clock_train_s: float = 0.0
    wall_clock_eval_s: float = 0.0
    seed: int | None = None
    classes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class_accuracy": dict(sorted(self.per_class_accuracy.items())),
            "confusion": self.confusion.tolist(),
            "classes": list(self.classes),
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def ridge_solve(x: np.ndarray, y: np.ndarray, lam: float, intercept: bool = True) -> np.ndarray:
    """Solve min ||XW - Y||^2 + lam*||W_without_intercept||^2 in closed form.

    Appends an all-ones column when ``intercept`` and leaves that row of W
    out of the penalty. Uses a Cholesky factorization of the normal
    equations; on failure retries once with 1e-8 diagonal jitter.
    Returns W of shape (F[+1], C).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if intercept:
        x = np.hstack([x, np.ones((x.shape[0], 1))])
    penalty = np.eye(x.shape[1])
    if intercept:
        penalty[-1, -1] = 0.0
    gram = x.T @ x + lam * penalty
    rhs = x.T @ y
    try:
        return sla.cho_solve(sla.cho_factor(gram), rhs)
    except np.linalg.LinAlgError:
        pass
    try:
        jittered = gram + 1e-8 * np.eye(gram.shape[0])
        return sla.cho_solve(sla.cho_factor(jittered), rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"normal-equation factorization failed even with jitter (lambda={lam})"
        ) from exc


def fit_ridge(
    features: np.ndarray,
    labels: list[str],
    lam: float,
    classes: list[str] | None = None,
) -> ReadoutModel:
    """Fit the readout on N x F features against one-hot class targets.

    ``classes`` fixes the class ordering (e.g. from a dataset manifest);
    when omitted it is the sorted set of training labels. Features are
    z-scored with statistics fitted here; zero-variance columns get
    standard deviation 1 so they contribute nothing after centering.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"features must be 2-d, got shape {features.shape}")
    if not np.isfinite(features).all():
        raise ValueError("features have non-finite entries")
    if len(labels) != features.shape[0]:
        raise ValueError(f"{len(labels)} labels for {features.shape[0]} feature rows")

    if classes is None:
        class_list = sorted(set(labels))
    else:
        class_list = list(classes)
    if len(class_list) < 2:
        raise ValueError("need at least 2 classes")
    if features.shape[0] < len(class_list):
        raise ValueError(
            f"need at least one sample per class: N={features.shape[0]} < C={len(class_list)}"
        )
    index = {c: i for i, c in enumerate(class_list)}
    counts = np.zeros(len(class_list), dtype=int)
    for label in labels:
        if label not in index:
            raise ValueError(f"label {label!r} not in class list")
        counts[index[label]] += 1
    missing = [c for c, k in zip(class_list, counts) if k == 0]
    if missing:
        raise ValueError(f"classes with zero training samples: {missing}")

    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std[std == 0.0] = 1.0
    z = (features - mean) / std

    targets = np.zeros((features.shape[0], len(class_list)))
    for i, label in enumerate(labels):
        targets[i, index[label]] = 1.0

    w = ridge_solve(z, targets, lam, intercept=True)
    if not np.isfinite(w).all():
        raise NumericalError("ridge solve produced non-finite readout weights")
    return ReadoutModel(
        w_out=w.T,
        classes=tuple(class_list),
        feature_mean=mean,
        feature_std=std,
        lam=lam,
    )


def predict(model: ReadoutModel, features: np.ndarray):
    """Class label(s) and score vector(s) for one feature vector or a batch.

    Scores are the linear readout outputs; the label is the argmax class,
    ties resolved toward the lowest class index.
    """
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    batch = features[None, :] if single else features
    if batch.ndim != 2 or batch.shape[1] != model.n_features:
        raise ValueError(
            f"feature width {features.shape[-1] if features.ndim else 0} "
            f"does not match model width {model.n_features}"
        )
    z = (batch - model.feature_mean) / model.feature_std
    scores = z @ model.w_out[:, :-1].T + model.w_out[:, -1]
    picks = np.argmax(scores, axis=1)  # first maximum = lowest class index
    labels = [model.classes[i] for i in picks]
    if single:
        return labels[0], scores[0]
    return labels, scores


def evaluate(
    model: ReadoutModel,
    features: np.ndarray,
    labels: list[str],
    train_seconds: float = 0.0,
    seed: int | None = None,
) -> EvalReport:
    """Accuracy, per-class accuracy and confusion counts on one split."""
    if len(labels) == 0:
        raise ValueError("cannot evaluate on zero samples")
    index = {c: i for i, c in enumerate(model.classes)}
    for label in labels:
        if label not in index:
            raise ValueError(f"label {label!r} unknown to the model")

    start = time.perf_counter()
    predicted, _ = predict(model, np.atleast_2d(features))
    eval_seconds = time.perf_counter() - start

    c = len(model.classes)
    confusion = np.zeros((c, c), dtype=np.int64)
    for truth, guess in zip(labels, predicted):
        confusion[index[truth], index[guess]] += 1
    row_totals = confusion.sum(axis=1)
    per_class = {
        cls: float(confusion[i, i] / row_totals[i])
        for i, cls in enumerate(model.classes)
        if row_totals[i] > 0
    }
    accuracy = float(np.trace(confusion) / len(labels))
    return EvalReport(
        accuracy=accuracy,
        per_class_accuracy=per_class,
        confusion=confusion,
        n_samples=len(labels),
        wall_clock_train_s=train_seconds,
        wall_clock_eval_s=eval_seconds,
        seed=seed,
        classes=model.classes,
    )
