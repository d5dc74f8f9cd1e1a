"""Memory-capacity measurement: RAM-emulation tasks, eps(N) over random
labellings, the direct capacity estimate C = max[N log2(1/eps(N))], the
precision-normalized policy, the numerical precision floor calibration, and
the C <= W bound accounting.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from . import readout
from .elm import Elm
from .reservoir import Reservoir

EPS_CLAMP = 2.0**-52          # double precision cannot certify more bits per label
NORMALIZED_THRESHOLD = 1e-10  # mean-error gate for the precision-normalized policy
LABEL_LOW, LABEL_HIGH = 0.1, 1.1
DEFAULT_LABELLINGS = 30
BOUND_TOLERANCE = 0.10


def seed_key(*parts) -> np.random.SeedSequence:
    """Deterministic seed derivation from a mixed tuple of ints and strings."""
    entropy = []
    for p in parts:
        if isinstance(p, str):
            entropy.append(zlib.crc32(p.encode()))
        elif isinstance(p, (int, np.integer)):
            entropy.append(int(p) & 0xFFFFFFFFFFFFFFFF)
        else:
            raise TypeError(f"seed parts must be int or str, got {type(p)}")
    return np.random.SeedSequence(entropy)


# ---------------------------------------------------------------------------
# Learners: a uniform feature-map surface over the fQRC and the classical ELM
# ---------------------------------------------------------------------------

class FqrcLearner:
    """Feature-map view of a reservoir for capacity and task experiments.

    mode "exact" gives deterministic expectation values, "sampled" estimates
    them from n_shots detector draws (fresh per evaluation), "noisy" adds
    fresh uniform noise of the given amplitude to the exact values.
    Output probabilities per input are cached; pass a shared dict to reuse
    them across learner variants.
    """

    def __init__(self, reservoir: Reservoir, n_features: int | None = None,
                 mode: str = "exact", n_shots: int | None = None,
                 noise_amplitude: float = 0.0, cache: dict | None = None):
        if mode not in ("exact", "sampled", "noisy"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "sampled" and (n_shots is None or n_shots < 1):
            raise ValueError("sampled mode needs n_shots >= 1")
        self.reservoir = reservoir
        self.mode = mode
        self.n_shots = n_shots
        self.noise_amplitude = noise_amplitude
        self.n_features = reservoir.config.n_features if n_features is None else n_features
        self.input_dim = reservoir.config.modes
        self.input_low, self.input_high = 0.0, 1.0
        self._cache = {} if cache is None else cache

    @property
    def cache(self) -> dict:
        return self._cache

    def description(self) -> str:
        if self.mode == "exact":
            return "fqrc-exact"
        if self.mode == "sampled":
            return f"fqrc-sampled({self.n_shots})"
        return f"fqrc-noisy({self.noise_amplitude:g})"

    def sample_inputs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.input_low, self.input_high, size=(n, self.input_dim))

    def _probabilities(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        keys = [x.tobytes() for x in xs]
        missing = [i for i, k in enumerate(keys) if k not in self._cache]
        if missing:
            p, tr = self.reservoir.batch_probabilities(xs[missing])
            for j, i in enumerate(missing):
                self._cache[keys[i]] = (p[j], float(tr[j]))
        rows = [self._cache[k] for k in keys]
        return np.stack([r[0] for r in rows]), np.array([r[1] for r in rows])

    def feature_matrix(self, xs: np.ndarray, eval_seed=None) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        p, tr = self._probabilities(xs)
        table = self.reservoir.product_table[:, :self.n_features]
        if self.mode == "exact":
            return (p @ table) / tr[:, None]
        rng = np.random.default_rng(eval_seed)
        if self.mode == "noisy":
            base = (p @ table) / tr[:, None]
            if self.noise_amplitude == 0:
                return base
            return base + rng.uniform(-self.noise_amplitude, self.noise_amplitude,
                                      size=base.shape)
        # sampled: one shared shot record per input, all features from it
        out = np.empty((len(xs), self.n_features))
        for i in range(len(xs)):
            cdf = np.cumsum(p[i] / tr[i])
            cdf[-1] = 1.0
            idx = np.searchsorted(cdf, rng.random(self.n_shots), side="right")
            counts = np.bincount(idx, minlength=len(cdf))
            out[i] = (counts / self.n_shots) @ table
        return out


class ElmLearner:
    """Capacity-protocol view of the classical ELM; input domain [-1, 1]^5."""

    def __init__(self, elm: Elm):
        self.elm = elm
        self.n_features = elm.config.n_hidden
        self.input_dim = elm.config.n_inputs
        self.input_low, self.input_high = -1.0, 1.0

    def description(self) -> str:
        return f"elm(rho={self.elm.config.rho:g},noise={self.elm.config.noise_amplitude:g})"

    def sample_inputs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.input_low, self.input_high, size=(n, self.input_dim))

    def feature_matrix(self, xs: np.ndarray, eval_seed=None) -> np.ndarray:
        return self.elm.feature_matrix(xs, eval_seed=eval_seed)


# ---------------------------------------------------------------------------
# RAM-emulation tasks and eps(N)
# ---------------------------------------------------------------------------

@dataclass
class RamTask:
    inputs: np.ndarray   # (N, input_dim), pairwise distinct
    labels: np.ndarray   # (N,)
    seed_entropy: tuple


def gen_ram_task(learner, n: int, seed_parts: tuple, labelling: str = "random") -> RamTask:
    """N distinct uniform inputs with random labels in [0.1, 1.1].

    labelling "identical" / "one_off" are the designated robustness modes and
    relax the label-distinctness invariant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed_key(*seed_parts))
    inputs = learner.sample_inputs(n, rng)
    for _ in range(100):
        _, idx = np.unique(inputs.round(decimals=14), axis=0, return_index=True)
        if len(idx) == n:
            break
        dup = np.setdiff1d(np.arange(n), idx)
        inputs[dup] = learner.sample_inputs(len(dup), rng)
    else:
        raise ValueError(f"could not draw {n} distinct inputs")
    if labelling == "random":
        labels = rng.uniform(LABEL_LOW, LABEL_HIGH, size=n)
        while len(np.unique(labels)) < n:
            labels = rng.uniform(LABEL_LOW, LABEL_HIGH, size=n)
    elif labelling == "identical":
        labels = np.full(n, rng.uniform(LABEL_LOW, LABEL_HIGH))
    elif labelling == "one_off":
        labels = np.full(n, rng.uniform(LABEL_LOW, LABEL_HIGH))
        labels[rng.integers(n)] = rng.uniform(LABEL_LOW, LABEL_HIGH)
    else:
        raise ValueError(f"unknown labelling mode {labelling!r}")
    return RamTask(inputs, labels, seed_parts)


def eps_of_N(learner, n: int, n_labellings: int = DEFAULT_LABELLINGS, seed: int = 0,
             labelling: str = "random", rcond: float = 1e-15) -> tuple[float, float]:
    """Mean training error over random labellings; returns (mean, stderr).

    Each labelling is a fresh task; the readout is fit and evaluated on the
    same N pairs, with independent evaluation stochasticity (fresh shots or
    noise) as during physical operation.
    """
    if n_labellings < 1:
        raise ValueError("n_labellings must be >= 1")
    errs = np.empty(n_labellings)
    for k in range(n_labellings):
        task = gen_ram_task(learner, n, (seed, n, k, "task"), labelling)
        f_train = learner.feature_matrix(task.inputs, seed_key(seed, n, k, "train"))
        weights = readout.fit(f_train, task.labels, rcond=rcond)
        f_eval = learner.feature_matrix(task.inputs, seed_key(seed, n, k, "eval"))
        pred = readout.predict(weights, f_eval)
        errs[k] = readout.mean_abs_norm_err(pred, task.labels)
    stderr = float(errs.std(ddof=1) / math.sqrt(n_labellings)) if n_labellings > 1 else 0.0
    return float(errs.mean()), stderr


# ---------------------------------------------------------------------------
# Capacity estimates
# ---------------------------------------------------------------------------

def default_grid(n_w: int) -> np.ndarray:
    """Dense around the expected knee at N = n_w, sparse beyond."""
    grid = set(range(1, n_w + 6)) | {2 * n_w}
    return np.array(sorted(grid))


@dataclass
class CapacityReport:
    grid: np.ndarray
    eps_mean: np.ndarray
    eps_stderr: np.ndarray
    n_labellings: int
    seed: int
    learner: str
    c_direct_bits: float = 0.0
    n_at_max: int = 0
    c_norm_bits: float | None = None
    eps_p_bits: float | None = None
    w_bits: float | None = None

    def csv_rows(self) -> list[dict]:
        rows = []
        for n, e, s in zip(self.grid, self.eps_mean, self.eps_stderr):
            rows.append({
                "N": int(n),
                "eps_mean": e,
                "eps_stderr": s,
                "C_direct_bits": self.c_direct_bits,
                "C_norm_bits": "" if self.c_norm_bits is None else self.c_norm_bits,
                "W_bits": "" if self.w_bits is None else self.w_bits,
                "n_labellings": self.n_labellings,
                "seed": self.seed,
            })
        return rows


def direct_capacity_bits(grid, eps) -> tuple[float, int]:
    """C = max over N of N log2(1/eps(N)), eps floored at 2^-52."""
    eps = np.maximum(np.asarray(eps, dtype=float), EPS_CLAMP)
    c = np.asarray(grid) * np.log2(1.0 / eps)
    i = int(np.argmax(c))
    return float(max(c[i], 0.0)), int(np.asarray(grid)[i])


def capacity_direct(learner, grid=None, n_labellings: int = DEFAULT_LABELLINGS,
                    seed: int = 0, labelling: str = "random") -> CapacityReport:
    if grid is None:
        grid = default_grid(learner.n_features)
    grid = np.asarray(sorted(grid))
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    eps = np.empty(len(grid))
    err = np.empty(len(grid))
    for i, n in enumerate(grid):
        eps[i], err[i] = eps_of_N(learner, int(n), n_labellings, seed, labelling)
    c, n_at = direct_capacity_bits(grid, eps)
    return CapacityReport(grid, eps, err, n_labellings, seed,
                          learner.description(), c_direct_bits=c, n_at_max=n_at)


def normalized_capacity_bits(grid, eps, eps_p_bits: float,
                             threshold: float = NORMALIZED_THRESHOLD) -> float:
    """Largest grid N with eps(N) < threshold, times the precision floor."""
    if eps_p_bits <= 0:
        raise ValueError("eps_p_bits must be positive")
    passing = np.asarray(grid)[np.asarray(eps) < threshold]
    if len(passing) == 0:
        return 0.0
    return float(passing.max() * eps_p_bits)


def capacity_normalized(learner, grid, eps_p_bits: float,
                        threshold: float = NORMALIZED_THRESHOLD,
                        n_labellings: int = DEFAULT_LABELLINGS,
                        seed: int = 0) -> CapacityReport:
    report = capacity_direct(learner, grid, n_labellings, seed)
    report.eps_p_bits = eps_p_bits
    report.c_norm_bits = normalized_capacity_bits(report.grid, report.eps_mean,
                                                  eps_p_bits, threshold)
    return report


# ---------------------------------------------------------------------------
# Precision-floor calibration
# ---------------------------------------------------------------------------

# the low end must sit well below (intrinsic eps) / (noise amplification of
# the design matrix); the reservoir design is conditioned near 1e-7, so the
# flat region only opens up around 1e-20 and below
DEFAULT_FLOOR_AMPLITUDES = tuple(10.0**e for e in range(-22, -5))
PLATEAU_REL_CHANGE_PER_DECADE = 0.05


@dataclass
class PrecisionFloor:
    eps_p_bits: float
    knee_amplitude: float | None
    amplitudes: np.ndarray
    c_bits: np.ndarray
    bits_per_param: np.ndarray
    plateau_size: int


def estimate_precision_floor(make_learner, amplitudes=None, grid=None,
                             n_labellings: int = DEFAULT_LABELLINGS,
                             seed: int = 0) -> PrecisionFloor:
    """Calibrate the pipeline precision floor by the noise-plateau procedure.

    make_learner(amplitude) must return a learner whose evaluation adds fresh
    uniform noise of that amplitude.  The direct capacity is measured per
    amplitude; the plateau where C is flat (< 5% relative change per decade)
    certifies convergence to the noiseless limit, eps_p is the bits per
    effective parameter at the smallest amplitude, and the first amplitude
    past the plateau is the knee.
    """
    amps = np.asarray(sorted(DEFAULT_FLOOR_AMPLITUDES if amplitudes is None
                             else amplitudes))
    if len(amps) < 3:
        raise ValueError("amplitude sweep too short")
    c_bits = np.empty(len(amps))
    bits_pp = np.empty(len(amps))
    for i, a in enumerate(amps):
        learner = make_learner(float(a))
        rep = capacity_direct(learner, grid, n_labellings, seed)
        c_bits[i] = rep.c_direct_bits
        bits_pp[i] = rep.c_direct_bits / rep.n_at_max if rep.n_at_max else 0.0
    plateau_end = 1
    for i in range(1, len(amps)):
        decades = math.log10(amps[i] / amps[i - 1])
        if c_bits[i - 1] <= 0:
            break
        rel = abs(c_bits[i] - c_bits[i - 1]) / c_bits[i - 1]
        if rel > PLATEAU_REL_CHANGE_PER_DECADE * max(decades, 1.0):
            break
        plateau_end = i + 1
    if plateau_end < 2:
        raise ValueError("no plateau detected; noise sweep too narrow at the low end")
    eps_p = float(bits_pp[0])
    knee = float(amps[plateau_end]) if plateau_end < len(amps) else None
    return PrecisionFloor(eps_p, knee, amps, c_bits, bits_pp, plateau_end)


# ---------------------------------------------------------------------------
# W accounting and the C <= W bound
# ---------------------------------------------------------------------------

def w_bits(levels) -> float:
    """W = sum log2 M_i over per-parameter level counts."""
    levels = np.asarray(levels, dtype=float)
    if np.any(levels < 2):
        raise ValueError("each parameter needs at least 2 distinct levels")
    return float(np.log2(levels).sum())


def w_bits_uniform(n_w: int, bits_per_param: float) -> float:
    return float(n_w * bits_per_param)


def w_bits_sampled(n_w: int, n_s: int, n_s_ref: int, bits_ref: float) -> float:
    """Shot-noise budget: delta-w ~ 1/sqrt(N_s) adds half a bit per doubling."""
    if n_s < 1 or n_s_ref < 1:
        raise ValueError("shot counts must be >= 1")
    return float(n_w * (bits_ref + 0.5 * math.log2(n_s / n_s_ref)))


# characteristic dynamic range of features and labels; a noisy read-out can
# resolve about log2(scale / amplitude) levels per parameter
NOISY_FEATURE_SCALE = 2.0


def w_bits_noisy(n_w: int, amplitude: float, eps_p_bits: float,
                 scale: float = NOISY_FEATURE_SCALE) -> float:
    """Noise budget: per-parameter bits are the signal-to-noise resolution,
    capped by the numerical precision floor."""
    if amplitude <= 0:
        return w_bits_uniform(n_w, eps_p_bits)
    snr_bits = max(0.0, math.log2(scale / amplitude))
    return float(n_w * min(eps_p_bits, snr_bits))


@dataclass
class BoundCheck:
    c_est_bits: float
    w_bits: float
    margin_bits: float
    satisfied: bool
    anomaly: bool


def check_bound(c_est_bits: float, w_budget_bits: float,
                tolerance: float = BOUND_TOLERANCE) -> BoundCheck:
    """C <= W with estimation tolerance; a violation beyond it is an anomaly."""
    margin = c_est_bits - w_budget_bits
    satisfied = c_est_bits <= w_budget_bits * (1.0 + tolerance) + 1e-9
    return BoundCheck(c_est_bits, w_budget_bits, margin, satisfied, not satisfied)
