"""Classical baseline: single-hidden-layer extreme learning machine.

Random fixed input layer, tanh activation with zero bias, optional additive
uniform read-out noise that is fresh on every evaluation.  The readout is
trained with the same pseudo-inverse module as the quantum reservoir.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ElmConfig:
    n_inputs: int = 5
    n_hidden: int = 31
    rho: float = 1.0
    noise_amplitude: float = 0.0
    seed: int = 0
    normalization: str = "max_abs"  # or "spectral"

    def __post_init__(self):
        if self.n_hidden < 1:
            raise ValueError("n_hidden must be >= 1")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.normalization not in ("max_abs", "spectral"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    def to_dict(self) -> dict:
        return {
            "n_inputs": self.n_inputs,
            "n_hidden": self.n_hidden,
            "rho": self.rho,
            "noise_amplitude": self.noise_amplitude,
            "seed": self.seed,
            "normalization": self.normalization,
        }


def input_matrix(config: ElmConfig) -> np.ndarray:
    """Uniform random W_in, normalized to unit scale."""
    rng = np.random.default_rng(config.seed)
    w = rng.uniform(-1.0, 1.0, size=(config.n_hidden, config.n_inputs))
    if config.normalization == "max_abs":
        return w / np.max(np.abs(w))
    return w / np.linalg.svd(w, compute_uv=False)[0]


class Elm:
    """Fixed random hidden layer; inputs expected normalized to [-1, 1]."""

    def __init__(self, config: ElmConfig):
        self.config = config
        self.w_in = input_matrix(config)

    def feature_matrix(self, xs: np.ndarray, eval_seed=None) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.shape[1] != self.config.n_inputs:
            raise ValueError(f"inputs must have {self.config.n_inputs} columns")
        h = np.tanh(self.config.rho * xs @ self.w_in.T)
        a = self.config.noise_amplitude
        if a > 0:
            rng = np.random.default_rng(eval_seed)
            h = h + rng.uniform(-a, a, size=h.shape)
        return h

    def features(self, x: np.ndarray, eval_seed=None) -> np.ndarray:
        return self.feature_matrix(x, eval_seed)[0]
