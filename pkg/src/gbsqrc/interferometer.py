"""Haar-random mode unitaries, their two-mode-rotation factorization, and
exact photon-number-conserving application in truncated Fock space.

The factorization nulls the strict lower triangle with adjacent-mode Givens
rotations applied from the right, leaving a diagonal of output phases:
U = D . R_k^dag ... R_1^dag.  A plan stores the rotations in application
order plus the final per-mode phases; reconstruction reverses this exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm, logm

from .fock import (
    FockSpaceError,
    PureState,
    SpaceSpec,
    State,
    annihilation_matrix,
    apply_diagonal,
    apply_two_mode,
    occupations,
)

UNITARITY_TOL = 1e-12


def haar_unitary(n_modes: int, seed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R diagonal is phase-normalized so the distribution is exactly Haar.
    """
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n_modes, n_modes))
         + 1j * rng.standard_normal((n_modes, n_modes))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def check_unitary(u: np.ndarray, tol: float = UNITARITY_TOL):
    n = u.shape[0]
    err = np.max(np.abs(u.conj().T @ u - np.eye(n)))
    if err > tol:
        raise FockSpaceError(f"matrix is not unitary: max deviation {err:.3e}")


@dataclass(frozen=True)
class Rotation:
    """Adjacent-mode rotation on (mode, mode+1) with mixing angle theta, phase phi."""

    mode: int
    theta: float
    phi: float


@dataclass
class ClementsPlan:
    n_modes: int
    rotations: list[Rotation]
    output_phases: np.ndarray  # (M,) angles

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "rotations": [[r.mode, r.theta, r.phi] for r in self.rotations],
            "output_phases": list(map(float, self.output_phases)),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClementsPlan":
        return cls(
            n_modes=int(d["n_modes"]),
            rotations=[Rotation(int(m), float(t), float(p)) for m, t, p in d["rotations"]],
            output_phases=np.asarray(d["output_phases"], dtype=float),
        )


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -np.exp(1j * phi) * s],
                     [np.exp(-1j * phi) * s, c]])


def _embed(mat2: np.ndarray, mode: int, n_modes: int) -> np.ndarray:
    full = np.eye(n_modes, dtype=np.complex128)
    full[mode:mode + 2, mode:mode + 2] = mat2
    return full


def clements_decompose(u: np.ndarray) -> ClementsPlan:
    """Factor a unitary into M(M-1)/2 adjacent rotations plus output phases."""
    check_unitary(u)
    m = u.shape[0]
    v = u.astype(np.complex128).copy()
    nulling: list[Rotation] = []
    for row in range(m - 1, 0, -1):
        for col in range(row):
            a, b = v[row, col], v[row, col + 1]
            if abs(a) < 1e-14:
                theta, phi = 0.0, 0.0
            elif abs(b) < 1e-14:
                theta, phi = np.pi / 2, 0.0
            else:
                t = a / b
                theta = float(np.arctan(abs(t)))
                phi = float(-np.angle(-t))
            nulling.append(Rotation(col, theta, phi))
            v = v @ _embed(rotation_matrix(theta, phi), col, m)
    phases = np.angle(np.diag(v))
    # U = D . R_k^dag ... R_1^dag with R^dag = R(-theta, phi); the first plan
    # entry is applied first, i.e. it is the rightmost factor R_1^dag
    rotations = [Rotation(r.mode, -r.theta, r.phi) for r in nulling]
    return ClementsPlan(m, rotations, phases)


def reconstruct(plan: ClementsPlan) -> np.ndarray:
    m = plan.n_modes
    mat = np.eye(m, dtype=np.complex128)
    for rot in plan.rotations:
        mat = _embed(rotation_matrix(rot.theta, rot.phi), rot.mode, m) @ mat
    return np.diag(np.exp(1j * plan.output_phases)) @ mat


# ---------------------------------------------------------------------------
# Fock-space lifts
# ---------------------------------------------------------------------------

def _mode_quadratic_lift(v: np.ndarray, d_per_mode: int) -> np.ndarray:
    """exp(sum_ij [log v]_ij a_i^dag a_j), mapping a_k^dag -> sum_i v_ik a_i^dag."""
    h = logm(v)
    n = v.shape[0]
    eye = np.eye(d_per_mode)
    a = annihilation_matrix(d_per_mode)
    ops = []
    for k in range(n):
        factors = [eye] * n
        factors[k] = a
        full = np.array([[1.0 + 0j]])
        for f in factors:
            full = np.kron(full, f)
        ops.append(full)
    gen = np.zeros((d_per_mode**n,) * 2, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            if h[i, j] != 0:
                gen += h[i, j] * (ops[i].conj().T @ ops[j])
    return expm(gen)


@lru_cache(maxsize=None)
def _beamsplitter_cached(theta: float, phi: float, cutoff: int) -> np.ndarray:
    d_pad = 2 * cutoff - 1  # complete sectors up to total 2(cutoff-1)
    v = rotation_matrix(theta, phi)
    full = _mode_quadratic_lift(v, d_pad)
    keep = np.array([n1 * d_pad + n2
                     for n1 in range(cutoff) for n2 in range(cutoff)])
    out = np.ascontiguousarray(full[np.ix_(keep, keep)])
    out.setflags(write=False)
    return out


def beamsplitter_fock(theta: float, phi: float, cutoff: int) -> np.ndarray:
    """Two-mode d^2 x d^2 Fock lift of the rotation; block-diagonal per total n.

    Built by exponentiating the mixing generator in a padded space then
    truncating, so blocks with total photon number <= cutoff-1 are exactly
    unitary.
    """
    return _beamsplitter_cached(float(theta), float(phi), cutoff)


def phase_diagonal(phases: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Fock-basis diagonal of the per-mode output phase layer."""
    return np.exp(1j * occupations(space) @ np.asarray(phases))


def apply_interferometer(plan: ClementsPlan, state: State,
                         conservation_warn: bool = True) -> State:
    """Apply the plan's rotations in order, then the output phases."""
    space = state.space
    if plan.n_modes != space.modes:
        raise FockSpaceError(
            f"plan has {plan.n_modes} modes, state has {space.modes}")
    d = space.cutoff
    if conservation_warn:
        p = np.abs(state.amplitudes) ** 2 if isinstance(state, PureState) \
            else np.diag(state.matrix).real
        total = occupations(space).sum(axis=1)
        high = float(p[total > d - 1].sum())
        if high > 1e-6:
            warnings.warn(
                f"state has weight {high:.3e} at total photon number >= cutoff; "
                "photon-number conservation is unreliable there", stacklevel=2)
    out = state
    for rot in plan.rotations:
        op = beamsplitter_fock(rot.theta, rot.phi, d)
        out = apply_two_mode(op, rot.mode, rot.mode + 1, out)
    return apply_diagonal(phase_diagonal(plan.output_phases, space), out)


def plan_unitary_fock(plan: ClementsPlan, cutoff: int) -> np.ndarray:
    """Dense d^M x d^M matrix of the full interferometer circuit."""
    space = SpaceSpec(plan.n_modes, cutoff)
    dim = space.dim
    d, m = cutoff, plan.n_modes
    mat = np.eye(dim, dtype=np.complex128)
    for rot in plan.rotations:
        op4 = beamsplitter_fock(rot.theta, rot.phi, d).reshape(d, d, d, d)
        t = mat.reshape((d,) * m + (dim,))
        out = np.tensordot(op4, t, axes=((2, 3), (rot.mode, rot.mode + 1)))
        mat = np.moveaxis(out, (0, 1), (rot.mode, rot.mode + 1)).reshape(dim, dim)
    return phase_diagonal(plan.output_phases, space)[:, None] * mat


def lift_oracle(u: np.ndarray, cutoff: int) -> np.ndarray:
    """Independent dense lift of a mode unitary (test oracle; small M only).

    Exponentiates the second-quantized generator in a padded space covering
    every reachable total-photon sector, then truncates.  A unitary with an
    eigenvalue at -1 (log branch cut) is handled by a global-phase shift that
    is undone exactly on the number basis.
    """
    check_unitary(u)
    m = u.shape[0]
    space = SpaceSpec(m, cutoff)
    d_pad = m * (cutoff - 1) + 1
    if d_pad**m > 2**18:
        raise FockSpaceError("lift_oracle dense build too large; use smaller M or d")
    evals = np.linalg.eigvals(u)
    delta = 0.0
    if np.min(np.abs(evals + 1.0)) < 1e-8:
        delta = 0.3731  # arbitrary shift off the branch cut
    full = _mode_quadratic_lift(np.exp(1j * delta) * u, d_pad)
    if delta != 0.0:
        pad_space = SpaceSpec(m, d_pad)
        total = occupations(pad_space).sum(axis=1)
        full = full * np.exp(-1j * delta * total)[None, :]
    keep = np.array([int(np.ravel_multi_index(occ, (d_pad,) * m))
                     for occ in np.ndindex(*(cutoff,) * m)])
    return np.ascontiguousarray(full[np.ix_(keep, keep)])
