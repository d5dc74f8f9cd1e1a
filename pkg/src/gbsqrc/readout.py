"""Linear output layer: pseudo-inverse training, prediction, and error metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class Dataset:
    inputs: np.ndarray   # (N, input_dim) or object rows for quantum inputs
    targets: np.ndarray  # (N,)

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=float)
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets must have equal length")
        if not np.isfinite(self.targets).all():
            raise ValueError("targets must be finite")

    def __len__(self) -> int:
        return len(self.targets)


def fit(design: np.ndarray, targets: np.ndarray, rcond: float = 1e-15) -> np.ndarray:
    """Minimum-norm least-squares weights via SVD pseudo-inverse.

    Singular values below rcond * sigma_max are treated as zero.  Two steps of
    iterative refinement with the residual accumulated in extended precision
    tighten the residual toward machine precision; each correction lies in the
    row space, so the minimum-norm property survives.
    """
    design = np.asarray(design, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if design.ndim != 2 or design.shape[0] != targets.shape[0]:
        raise ValueError(f"design {design.shape} incompatible with targets {targets.shape}")
    if not np.any(design):
        warnings.warn("all-zero design matrix; returning zero weights", stacklevel=2)
        return np.zeros(design.shape[1])
    weights, *_ = np.linalg.lstsq(design, targets, rcond=rcond)
    design_ld = design.astype(np.longdouble)
    targets_ld = targets.astype(np.longdouble)
    w_ld = weights.astype(np.longdouble)
    for _ in range(2):
        residual = np.asarray(targets_ld - design_ld @ w_ld, dtype=float)
        correction, *_ = np.linalg.lstsq(design, residual, rcond=rcond)
        w_ld = w_ld + correction
    return np.asarray(w_ld, dtype=float)


def predict(weights: np.ndarray, features: np.ndarray) -> float | np.ndarray:
    """y = w . R; accepts a single feature vector or a stack of rows."""
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != len(weights):
        raise ValueError(f"feature length {features.shape[-1]} != weights {len(weights)}")
    return features @ np.asarray(weights, dtype=float)


def _check_pair(pred, truth):
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1 or len(pred) < 1:
        raise ValueError("prediction and truth must be equal-length 1-D sequences")
    if np.any(truth == 0.0):
        raise ValueError("error metrics are undefined for zero truth values")
    return pred, truth


def nmse(pred, truth) -> float:
    """(1/N) sum (y_i - y_true_i)^2 / y_true_i^2."""
    pred, truth = _check_pair(pred, truth)
    return float(np.mean((pred - truth) ** 2 / truth**2))


def mean_abs_norm_err(pred, truth) -> float:
    """mean |y_i - y_true_i| / |y_true_i|."""
    pred, truth = _check_pair(pred, truth)
    return float(np.mean(np.abs(pred - truth) / np.abs(truth)))
