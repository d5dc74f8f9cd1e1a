"""Task generators: named nonlinear function, 1-D generalization functions,
quantum operator-expectation task, random quantum inputs, and dataset assembly.

Domains are chosen so targets never vanish, since both error metrics divide
by the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import State, calibrate_mean_photon, expect_operator, fock_state, \
    quadrature_matrix, single_mode_state
from .readout import Dataset
from .capacity import seed_key

NAMED_DOMAIN = (0.1, 1.0)          # keeps f > 0 over the whole domain
ONE_D_TRAIN_RANGE = (0.0, 10.0)
ONE_D_EXTENDED_RANGE = (0.0, 12.0)  # out-of-range testing; bounded by leakage safety
OPERATOR_POWERS = (4, 2, 4, 0, 0)   # |<x1^4 x2^2 x3^4>| target operator


def classical_named_f(x) -> float | np.ndarray:
    """f(x) = (sum x_i)^4 + sum x_i^3 on 5-vectors (or rows thereof)."""
    x = np.asarray(x, dtype=float)
    s = x.sum(axis=-1)
    return s**4 + (x**3).sum(axis=-1)


def linear_1d(x):
    return np.asarray(x, dtype=float) + 1.0


def sinusoid_1d(x):
    # period 10 spans the training range once; +2 keeps targets nonzero
    return np.sin(2.0 * np.pi * np.asarray(x, dtype=float) / 10.0) + 2.0


ONE_D_FUNCTIONS = {"linear": linear_1d, "sinusoid": sinusoid_1d}

# battery of extra classical functions for sweep experiments; all positive
# on [0.1, 1]^5
TASK_REGISTRY = {
    "named": classical_named_f,
    "poly2": lambda x: (np.asarray(x).sum(axis=-1)) ** 2 + 1.0,
    "trig": lambda x: np.sin(np.asarray(x).sum(axis=-1)) + 2.0,
    "prod": lambda x: np.asarray(x).prod(axis=-1) + 1.0,
}


def encode_1d(x, hi: float = ONE_D_TRAIN_RANGE[1], n_modes: int = 5) -> np.ndarray:
    """Affine map of [0, hi] into mode-1 squeezing; other modes vacuum.

    hi is the upper end of the widest range in play (the test range in
    out-of-range mode) so the squeezer never exceeds its cap.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((len(x), n_modes))
    out[:, 0] = x / hi
    return out


@dataclass(frozen=True)
class TaskSpec:
    kind: str = "classical_named"  # classical_named | classical_1d | quantum_operator | ram
    n_train: int = 500
    n_test: int = 500
    seed: int = 0
    one_d_kind: str = "linear"
    extended_test: bool = False
    cutoff: int = 4
    function: str = "named"

    def __post_init__(self):
        if self.kind not in ("classical_named", "classical_1d", "quantum_operator", "ram"):
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.one_d_kind not in ONE_D_FUNCTIONS:
            raise ValueError(f"unknown 1-D function {self.one_d_kind!r}")
        if self.function not in TASK_REGISTRY:
            raise ValueError(f"unknown registry function {self.function!r}")


@dataclass(frozen=True)
class QuantumInputSpec:
    """Three active single-mode factors plus two vacuum modes."""

    families: tuple[str, str, str]
    params: tuple[float, float, float]
    mean_targets: tuple[float, float, float]


@dataclass
class TaskData:
    train: Dataset
    test: Dataset
    raw_train: np.ndarray | None = None  # unencoded inputs (1-D tasks)
    raw_test: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Quantum inputs
# ---------------------------------------------------------------------------

QUANTUM_FAMILIES = ("fock", "cat", "coherent", "thermal")


def random_quantum_input(seed_parts, cutoff: int = 4, n_active: int = 3,
                         n_modes: int = 5) -> tuple[list[State], QuantumInputSpec]:
    """Random product input: each active factor a random family with a random
    mean photon number in (0, 1] (Fock: n in {1, 2}); trailing modes vacuum."""
    rng = np.random.default_rng(seed_key(*seed_parts))
    families, params, targets = [], [], []
    factors: list[State] = []
    for _ in range(n_active):
        family = QUANTUM_FAMILIES[rng.integers(len(QUANTUM_FAMILIES))]
        if family == "fock":
            target = float(rng.integers(1, 3))
        else:
            target = float(rng.uniform(0.0, 1.0))
            target = max(target, 1e-3)  # keep calibration bracketable
        param = calibrate_mean_photon(family, target, cutoff)
        factors.append(single_mode_state(family, param, cutoff))
        families.append(family)
        params.append(param)
        targets.append(target)
    for _ in range(n_modes - n_active):
        factors.append(fock_state(0, cutoff))
    spec = QuantumInputSpec(tuple(families), tuple(params), tuple(targets))
    return factors, spec


def factors_from_spec(spec: QuantumInputSpec, cutoff: int = 4,
                      n_modes: int = 5) -> list[State]:
    factors = [single_mode_state(f, p, cutoff)
               for f, p in zip(spec.families, spec.params)]
    factors += [fock_state(0, cutoff) for _ in range(n_modes - len(spec.families))]
    return factors


def _quadrature_powers(cutoff: int) -> list[np.ndarray]:
    q = quadrature_matrix(cutoff)
    return [np.linalg.matrix_power(q, p) if p else np.eye(cutoff, dtype=complex)
            for p in OPERATOR_POWERS]


def quantum_target(state: State) -> float:
    """|<x1^4 x2^2 x3^4>| on a 5-mode state, computed by the simulator."""
    if state.space.modes != len(OPERATOR_POWERS):
        raise ValueError(f"need a {len(OPERATOR_POWERS)}-mode state")
    return abs(expect_operator(_quadrature_powers(state.space.cutoff), state))


def quantum_target_factors(factors: list[State]) -> float:
    """Same target for a product state, factor by factor (exactly equal to
    the tensored evaluation since the operator is a mode-local product)."""
    ops = _quadrature_powers(factors[0].space.cutoff)
    val = 1.0
    for op, factor in zip(ops, factors):
        val *= expect_operator([op], factor)
    return abs(val)


# ---------------------------------------------------------------------------
# Dataset assembly
# ---------------------------------------------------------------------------

def _draw_classical(n, rng, low, high, dim=5):
    return rng.uniform(low, high, size=(n, dim))


def make_dataset(spec: TaskSpec) -> TaskData:
    """Train/test datasets with disjoint seeds; i.i.d. from the same domain
    except in range-generalization mode, where test inputs extend past the
    training range."""
    rng_train = np.random.default_rng(seed_key(spec.seed, "train"))
    rng_test = np.random.default_rng(seed_key(spec.seed, "test"))
    if spec.kind == "classical_named":
        func = TASK_REGISTRY[spec.function]
        x_tr = _draw_classical(spec.n_train, rng_train, *NAMED_DOMAIN)
        x_te = _draw_classical(spec.n_test, rng_test, *NAMED_DOMAIN)
        data = TaskData(Dataset(x_tr, func(x_tr)), Dataset(x_te, func(x_te)))
    elif spec.kind == "classical_1d":
        func = ONE_D_FUNCTIONS[spec.one_d_kind]
        lo, hi = ONE_D_TRAIN_RANGE
        raw_tr = rng_train.uniform(lo, hi, size=spec.n_train)
        test_hi = ONE_D_EXTENDED_RANGE[1] if spec.extended_test else hi
        raw_te = rng_test.uniform(lo, test_hi, size=spec.n_test)
        data = TaskData(Dataset(encode_1d(raw_tr, test_hi), func(raw_tr)),
                        Dataset(encode_1d(raw_te, test_hi), func(raw_te)),
                        raw_train=raw_tr, raw_test=raw_te)
    elif spec.kind == "quantum_operator":
        def build(n, tag):
            specs, targets = [], []
            for i in range(n):
                factors, qspec = random_quantum_input((spec.seed, tag, i),
                                                      cutoff=spec.cutoff)
                specs.append(qspec)
                targets.append(quantum_target_factors(factors))
            inputs = np.empty(n, dtype=object)
            inputs[:] = specs
            return Dataset(inputs, np.array(targets))
        data = TaskData(build(spec.n_train, "train"), build(spec.n_test, "test"))
    else:  # ram
        x_tr = _draw_classical(spec.n_train, rng_train, 0.0, 1.0)
        x_te = _draw_classical(spec.n_test, rng_test, 0.0, 1.0)
        data = TaskData(Dataset(x_tr, rng_train.uniform(0.1, 1.1, spec.n_train)),
                        Dataset(x_te, rng_test.uniform(0.1, 1.1, spec.n_test)))
    for ds in (data.train, data.test):
        if np.any(ds.targets == 0.0):
            raise ValueError("task produced a zero target; domain choice is broken")
    return data
