"""Truncated Fock-space states and operators for multimode bosonic circuits.

States live in a tensor product of M single-mode spaces, each truncated to
occupations 0..d-1.  Non-number-conserving operations (squeezing) can push
probability past the cutoff; that loss is tracked as "leakage" and never
silently renormalized.  Expectation values divide by the remaining norm/trace
so downstream numbers stay meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

# dB = (20/ln 10) * r for the S(r) = exp[(r/2)(a^2 - a_dag^2)] convention
DB_PER_UNIT_R = 20.0 / math.log(10.0)
DEFAULT_R_MAX = 2.6 / DB_PER_UNIT_R  # 2.6 dB cap -> r ~ 0.29934

SQUEEZER_PADDING = 12
PURE_AMPLITUDE_LIMIT = 2**20
DENSITY_SIDE_LIMIT = 2**14


class FockSpaceError(ValueError):
    """Invalid space definition, operator/state mismatch, or unsafe operation."""


@dataclass(frozen=True)
class SpaceSpec:
    """M modes, each truncated to occupations 0..cutoff-1."""

    modes: int
    cutoff: int

    def __post_init__(self):
        if self.modes < 1:
            raise FockSpaceError(f"modes must be >= 1, got {self.modes}")
        if self.cutoff < 2:
            raise FockSpaceError(f"cutoff must be >= 2, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff**self.modes


def _check_pure_limit(space: SpaceSpec):
    if space.dim > PURE_AMPLITUDE_LIMIT:
        raise FockSpaceError(
            f"pure state of dimension {space.dim} exceeds limit {PURE_AMPLITUDE_LIMIT}"
        )


def _check_density_limit(space: SpaceSpec):
    if space.dim > DENSITY_SIDE_LIMIT:
        raise FockSpaceError(
            f"density operator side {space.dim} exceeds limit {DENSITY_SIDE_LIMIT}"
        )


@lru_cache(maxsize=None)
def _occupations_cached(modes: int, cutoff: int) -> np.ndarray:
    occ = np.indices((cutoff,) * modes).reshape(modes, -1).T
    occ.setflags(write=False)
    return occ


def occupations(space: SpaceSpec) -> np.ndarray:
    """(dim, M) table of per-mode photon counts, row i = occupation of flat index i.

    Mode 0 is the most significant digit of the mixed-radix flat index, matching
    the Kronecker-product ordering used by :func:`tensor`.
    """
    return _occupations_cached(space.modes, space.cutoff)


def flat_index(occ, space: SpaceSpec) -> int:
    return int(np.ravel_multi_index(tuple(occ), (space.cutoff,) * space.modes))


@dataclass
class PureState:
    amplitudes: np.ndarray  # (dim,) complex128
    space: SpaceSpec

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def leakage(self) -> float:
        return max(0.0, 1.0 - self.norm_sq)


@dataclass
class DensityOperator:
    matrix: np.ndarray  # (dim, dim) complex128
    space: SpaceSpec

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def leakage(self) -> float:
        return max(0.0, 1.0 - self.trace)


State = PureState | DensityOperator


def leakage(state: State) -> float:
    return state.leakage


def to_density(state: State) -> DensityOperator:
    if isinstance(state, DensityOperator):
        return state
    _check_density_limit(state.space)
    psi = state.amplitudes
    return DensityOperator(np.outer(psi, psi.conj()), state.space)


# ---------------------------------------------------------------------------
# State constructors
# ---------------------------------------------------------------------------

def vacuum(space: SpaceSpec) -> PureState:
    _check_pure_limit(space)
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[0] = 1.0
    return PureState(amps, space)


def fock_state(n: int, cutoff: int) -> PureState:
    if not 0 <= n < cutoff:
        raise FockSpaceError(f"fock({n}) needs n in [0, {cutoff})")
    amps = np.zeros(cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return PureState(amps, SpaceSpec(1, cutoff))


def coherent_state(alpha: complex, cutoff: int) -> PureState:
    """Truncated coherent state; not renormalized, so leakage is visible."""
    if not np.isfinite(alpha):
        raise FockSpaceError("alpha must be finite")
    n = np.arange(cutoff)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.exp(0.5 * log_fact)
    return PureState(amps.astype(np.complex128), SpaceSpec(1, cutoff))


def even_cat_state(alpha: complex, cutoff: int) -> PureState:
    """Even cat |alpha> + |-alpha>, normalized after truncation."""
    plus = coherent_state(alpha, cutoff).amplitudes
    minus = coherent_state(-alpha, cutoff).amplitudes
    amps = plus + minus
    nrm = np.linalg.norm(amps)
    if nrm == 0.0:
        raise FockSpaceError("cat state has zero norm after truncation")
    return PureState(amps / nrm, SpaceSpec(1, cutoff))


def thermal_state(nbar: float, cutoff: int) -> DensityOperator:
    """Thermal diagonal ~ (nbar/(1+nbar))^n, normalized after truncation."""
    if not np.isfinite(nbar) or nbar < 0:
        raise FockSpaceError("nbar must be finite and nonnegative")
    if nbar == 0.0:
        p = np.zeros(cutoff)
        p[0] = 1.0
    else:
        q = nbar / (1.0 + nbar)
        p = q ** np.arange(cutoff)
        p /= p.sum()
    return DensityOperator(np.diag(p).astype(np.complex128), SpaceSpec(1, cutoff))


FAMILIES = ("fock", "coherent", "cat", "thermal")


def single_mode_state(family: str, param: float, cutoff: int) -> State:
    if family == "fock":
        return fock_state(int(param), cutoff)
    if family == "coherent":
        return coherent_state(param, cutoff)
    if family == "cat":
        return even_cat_state(param, cutoff)
    if family == "thermal":
        return thermal_state(param, cutoff)
    raise FockSpaceError(f"unknown state family {family!r}")


def mean_photon(state: State, mode: int = 0) -> float:
    return expect((mode,), state)


def calibrate_mean_photon(family: str, target: float, cutoff: int) -> float:
    """Find the family parameter whose truncated state has the target <n>.

    Bisection runs against the simulator itself (the truncated state), so the
    returned parameter compensates for cutoff effects.
    """
    if not 0 < target <= 2.0 + 1e-12:
        raise FockSpaceError(f"target mean photon {target} outside supported range")
    if family == "fock":
        n = round(target)
        if abs(target - n) > 1e-9 or n >= cutoff:
            raise FockSpaceError(f"fock target {target} not an occupation < {cutoff}")
        return float(n)

    def err(p):
        return mean_photon(single_mode_state(family, p, cutoff)) - target

    lo = 1e-9
    if err(lo) > 0:
        raise FockSpaceError(f"{family}: target {target} below attainable range")
    hi = 0.5
    while err(hi) < 0:
        hi *= 2.0
        if hi > 1e4:
            raise FockSpaceError(
                f"{family}: target {target} not attainable at cutoff {cutoff} "
                f"(max <n> ~ {mean_photon(single_mode_state(family, 1e4, cutoff)):.4f})"
            )
    return float(brentq(err, lo, hi, xtol=1e-12, rtol=8.9e-16))


def tensor(factors: list[State]) -> State:
    """Kronecker product in mode order; promotes to density if any factor is mixed."""
    if not factors:
        raise FockSpaceError("tensor needs at least one factor")
    cutoff = factors[0].space.cutoff
    if any(f.space.cutoff != cutoff for f in factors):
        raise FockSpaceError("tensor factors must share the cutoff")
    modes = sum(f.space.modes for f in factors)
    space = SpaceSpec(modes, cutoff)
    mixed = any(isinstance(f, DensityOperator) for f in factors)
    if mixed:
        _check_density_limit(space)
        out = np.array([[1.0 + 0j]])
        for f in factors:
            out = np.kron(out, to_density(f).matrix)
        return DensityOperator(out, space)
    _check_pure_limit(space)
    amps = np.array([1.0 + 0j])
    for f in factors:
        amps = np.kron(amps, f.amplitudes)
    return PureState(amps, space)


# ---------------------------------------------------------------------------
# Single-mode operator matrices
# ---------------------------------------------------------------------------

def annihilation_matrix(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), k=1).astype(np.complex128)


def number_matrix(d: int) -> np.ndarray:
    return np.diag(np.arange(d)).astype(np.complex128)


def quadrature_matrix(d: int) -> np.ndarray:
    """x = (a + a_dag)/sqrt(2), hbar = 1 symmetric convention."""
    a = annihilation_matrix(d)
    return (a + a.conj().T) / math.sqrt(2.0)


@lru_cache(maxsize=None)
def _squeezer_cached(r: float, cutoff: int) -> np.ndarray:
    d_work = cutoff + SQUEEZER_PADDING
    a = annihilation_matrix(d_work)
    gen = (r / 2.0) * (a @ a - a.conj().T @ a.conj().T)
    full = expm(gen)
    out = np.ascontiguousarray(full[:cutoff, :cutoff])
    out.setflags(write=False)
    return out


def squeezer_matrix(r: float, cutoff: int, r_max: float = DEFAULT_R_MAX) -> np.ndarray:
    """S(r) = exp[(r/2)(a^2 - a_dag^2)] exponentiated in a padded dimension.

    Refuses |r| > r_max: past the 2.6 dB cap the d=4 truncation leaks too much.
    """
    if abs(r) > r_max + 1e-12:
        raise FockSpaceError(f"|r| = {abs(r):.5f} exceeds the squeezing cap {r_max:.5f}")
    return _squeezer_cached(float(r), cutoff)


# ---------------------------------------------------------------------------
# Operator application
# ---------------------------------------------------------------------------

def _apply_op_pure(op: np.ndarray, axes: tuple[int, ...], amps: np.ndarray,
                   space: SpaceSpec) -> np.ndarray:
    d, m = space.cutoff, space.modes
    k = len(axes)
    t = amps.reshape((d,) * m)
    opt = op.reshape((d,) * (2 * k))
    out = np.tensordot(opt, t, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(out, tuple(range(k)), axes).reshape(-1)


def apply_single_mode(op: np.ndarray, mode: int, state: State) -> State:
    """(I x ... x op x ... x I) |psi>, or two-sided conjugation for densities."""
    space = state.space
    if not 0 <= mode < space.modes:
        raise FockSpaceError(f"mode {mode} out of range for M={space.modes}")
    if op.shape != (space.cutoff, space.cutoff):
        raise FockSpaceError(f"operator shape {op.shape} != cutoff {space.cutoff}")
    return _apply_modes(op, (mode,), state)


def apply_two_mode(op: np.ndarray, mode_i: int, mode_j: int, state: State) -> State:
    space = state.space
    d = space.cutoff
    if op.shape != (d * d, d * d):
        raise FockSpaceError(f"two-mode operator shape {op.shape} != ({d*d},{d*d})")
    if mode_i == mode_j or not (0 <= mode_i < space.modes and 0 <= mode_j < space.modes):
        raise FockSpaceError(f"bad mode pair ({mode_i}, {mode_j})")
    return _apply_modes(op, (mode_i, mode_j), state)


def _apply_modes(op: np.ndarray, axes: tuple[int, ...], state: State) -> State:
    space = state.space
    if isinstance(state, PureState):
        return PureState(_apply_op_pure(op, axes, state.amplitudes, space), space)
    d, m = space.cutoff, space.modes
    k = len(axes)
    t = state.matrix.reshape((d,) * (2 * m))
    opt = op.reshape((d,) * (2 * k))
    ket_axes = axes
    bra_axes = tuple(a + m for a in axes)
    out = np.tensordot(opt, t, axes=(tuple(range(k, 2 * k)), ket_axes))
    out = np.moveaxis(out, tuple(range(k)), ket_axes)
    out = np.tensordot(opt.conj(), out, axes=(tuple(range(k, 2 * k)), bra_axes))
    out = np.moveaxis(out, tuple(range(k)), bra_axes)
    return DensityOperator(out.reshape(space.dim, space.dim), space)


def apply_diagonal(diag: np.ndarray, state: State) -> State:
    """Apply an operator diagonal in the Fock basis, given as its (dim,) diagonal."""
    if isinstance(state, PureState):
        return PureState(state.amplitudes * diag, state.space)
    return DensityOperator(state.matrix * np.outer(diag, diag.conj()), state.space)


# ---------------------------------------------------------------------------
# Expectations, probabilities, sampling
# ---------------------------------------------------------------------------

def _raw_probabilities(state: State) -> np.ndarray:
    if isinstance(state, PureState):
        return np.abs(state.amplitudes) ** 2
    return np.diag(state.matrix).real.copy()


def expect(subset, state: State) -> float:
    """<prod_{i in subset} n_i>, normalized by the state's remaining norm/trace."""
    subset = tuple(subset)
    if not subset:
        raise FockSpaceError("observable mode subset must be nonempty")
    space = state.space
    if any(not 0 <= i < space.modes for i in subset):
        raise FockSpaceError(f"subset {subset} out of range for M={space.modes}")
    p = _raw_probabilities(state)
    tr = p.sum()
    if tr <= 0:
        raise FockSpaceError("state has zero norm/trace")
    w = occupations(space)[:, subset].prod(axis=1)
    return float(p @ w / tr)


def expect_operator(ops: list[np.ndarray], state: State) -> float:
    """Tr[rho (O_1 x ... x O_M)] / Tr[rho] for one d x d matrix per mode."""
    space = state.space
    if len(ops) != space.modes:
        raise FockSpaceError(f"need {space.modes} per-mode operators, got {len(ops)}")
    for op in ops:
        if op.shape != (space.cutoff, space.cutoff):
            raise FockSpaceError(f"operator shape {op.shape} != cutoff {space.cutoff}")
    if isinstance(state, PureState):
        psi = state
        for mode, op in enumerate(ops):
            psi = apply_single_mode(op, mode, psi)
        nrm = state.norm_sq
        if nrm <= 0:
            raise FockSpaceError("state has zero norm")
        return float(np.vdot(state.amplitudes, psi.amplitudes).real / nrm)
    full = np.array([[1.0 + 0j]])
    for op in ops:
        full = np.kron(full, op)
    tr = state.trace
    if tr <= 0:
        raise FockSpaceError("state has zero trace")
    return float(np.trace(state.matrix @ full).real / tr)


def fock_probabilities(state: State) -> np.ndarray:
    """Outcome probabilities over the d^M occupation basis, renormalized to 1."""
    p = _raw_probabilities(state)
    tr = p.sum()
    if tr <= 0:
        raise FockSpaceError("state has zero norm/trace")
    p = np.maximum(p, 0.0) / tr
    return p / p.sum()


def sample_indices(probabilities: np.ndarray, n_shots: int, rng: np.random.Generator
                   ) -> np.ndarray:
    """Inverse-CDF draws of flat outcome indices."""
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0
    u = rng.random(n_shots)
    return np.searchsorted(cdf, u, side="right")


def sample_fock(state: State, n_shots: int, seed) -> np.ndarray:
    """(n_shots, M) array of sampled occupations; deterministic given seed."""
    if n_shots < 1:
        raise FockSpaceError("n_shots must be >= 1")
    rng = np.random.default_rng(seed)
    idx = sample_indices(fock_probabilities(state), n_shots, rng)
    return occupations(state.space)[idx]


def reduced_density(state: State, keep_modes) -> DensityOperator:
    """Partial trace down to the given modes (in their original order)."""
    keep = tuple(keep_modes)
    space = state.space
    d, m = space.cutoff, space.modes
    traced = tuple(i for i in range(m) if i not in keep)
    sub = SpaceSpec(len(keep), d)
    if isinstance(state, PureState):
        t = state.amplitudes.reshape((d,) * m)
        rho = np.tensordot(t, t.conj(), axes=(traced, traced))
    else:
        t = state.matrix.reshape((d,) * (2 * m))
        for i in sorted(traced, reverse=True):
            t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
        rho = t
    dk = d ** len(keep)
    return DensityOperator(rho.reshape(dk, dk), sub)
