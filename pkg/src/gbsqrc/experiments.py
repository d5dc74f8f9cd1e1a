"""Experiment kinds behind the CLI: capacity sweeps, precision-floor
calibration, task NMSE curves, generalization onsets, and out-of-range tests.

Every experiment resolves its config against explicit defaults, runs fully
deterministically from (config, seed), and persists one CSV with a sibling
schema file plus a JSON manifest sufficient to reproduce the run byte for
byte.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np
import scipy

from . import __version__, capacity, readout, tasks
from .elm import Elm, ElmConfig
from .reservoir import Reservoir, ReservoirConfig

OUT_ENV_VAR = "GBSQRC_OUT"

EXPERIMENT_KINDS = (
    "capacity-vs-nw",
    "capacity-vs-ns",
    "capacity-vs-noise",
    "eps-p",
    "task-nmse",
    "generalize",
    "range-generalize",
    "elm-baseline",
)

LEARNER_TYPES = ("fqrc-exact", "fqrc-sampled", "fqrc-noisy", "elm")

# per-kind default sweep values
DEFAULT_SWEEPS = {
    "capacity-vs-nw": [5, 10, 15, 20, 25, 31],
    "capacity-vs-ns": [100, 1000, 10000, 100000],
    "capacity-vs-noise": [10.0**e for e in range(-18, 1)],
    "eps-p": list(capacity.DEFAULT_FLOOR_AMPLITUDES),
    "task-nmse": [5, 10, 15, 20, 25, 31],
    "generalize": [5, 10, 15, 20, 25, 28, 31, 34, 40, 47, 54, 62, 80, 100],
    "range-generalize": [],   # not a sweep experiment
    "elm-baseline": [31, 48],  # hidden-layer sizes
}

DEFAULTS = {
    "kind": None,   # required
    "seed": 0,
    "out": None,    # resolved against OUT_ENV_VAR / cwd at run time
    "n_w": 31,
    "n_labellings": capacity.DEFAULT_LABELLINGS,
    "sweep": None,  # per-kind default
    "learner": {
        "type": "fqrc-exact",
        "n_shots": 1000,
        "noise": 0.0,
        "rho": 1.0,
        "n_hidden": 31,
        "elm_seed": 0,
    },
    "reservoir": {
        "modes": 5,
        "cutoff": 4,
        "interferometer_seed": 0,
    },
    # precision floor; None means calibrate in-run where needed
    "eps_p_bits": None,
    "knee_amplitude": None,
    "floor_labellings": 10,
    "task": {
        "function": "named",
        "n_train": 500,
        "n_test": 500,
        "shots": 1000,
        "one_d_kinds": ["linear", "sinusoid"],
        "n_points": 200,
    },
}


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


def resolve_config(raw: dict) -> tuple[dict, list[str]]:
    """Fill defaults into a raw config dict; returns (resolved, defaulted paths).

    Unknown keys are rejected with their path so typos never silently no-op.
    """
    def merge(defaults, given, path):
        out, used_default = {}, []
        for key, dval in defaults.items():
            here = f"{path}.{key}" if path else key
            if isinstance(dval, dict):
                sub = given.get(key, {})
                if not isinstance(sub, dict):
                    raise ConfigError(f"{here} must be a section/dict")
                merged, defs = merge(dval, sub, here)
                out[key] = merged
                used_default.extend(defs)
            elif key in given:
                out[key] = given[key]
            else:
                out[key] = dval
                used_default.append(here)
        for key in given:
            if key not in defaults:
                here = f"{path}.{key}" if path else key
                raise ConfigError(f"unknown config field {here!r}")
        return out, used_default

    resolved, defaulted = merge(DEFAULTS, raw, "")
    validate_config(resolved)
    if resolved["sweep"] is None:
        resolved["sweep"] = list(DEFAULT_SWEEPS[resolved["kind"]])
    return resolved, defaulted


def validate_config(config: dict):
    kind = config.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"kind must be one of {', '.join(EXPERIMENT_KINDS)}; got {kind!r}")
    lt = config["learner"]["type"]
    if lt not in LEARNER_TYPES:
        raise ConfigError(f"learner.type must be one of {', '.join(LEARNER_TYPES)}")
    modes = int(config["reservoir"]["modes"])
    n_max = 2**modes - 1
    if not 1 <= int(config["n_w"]) <= n_max:
        raise ConfigError(f"n_w must be in [1, {n_max}] for {modes} modes")
    if int(config["n_labellings"]) < 1:
        raise ConfigError("n_labellings must be >= 1")
    if lt == "fqrc-sampled" and int(config["learner"]["n_shots"]) < 1:
        raise ConfigError("learner.n_shots must be >= 1")
    sweep = config.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, (list, tuple)) or len(sweep) == 0 \
                and kind != "range-generalize":
            raise ConfigError("sweep must be a nonempty list of values")
        if kind in ("capacity-vs-nw", "task-nmse"):
            bad = [v for v in sweep if not 1 <= int(v) <= n_max]
            if bad:
                raise ConfigError(f"sweep N_w values out of [1, {n_max}]: {bad}")


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def build_reservoir(config: dict) -> Reservoir:
    rc = config["reservoir"]
    return Reservoir(ReservoirConfig(
        modes=int(rc["modes"]), cutoff=int(rc["cutoff"]),
        interferometer_seed=int(rc["interferometer_seed"])))


def build_learner(config: dict, reservoir: Reservoir | None,
                  n_features: int | None = None, cache: dict | None = None):
    lc = config["learner"]
    if lc["type"] == "elm":
        n_hidden = int(lc["n_hidden"]) if n_features is None else n_features
        return capacity.ElmLearner(Elm(ElmConfig(
            n_hidden=n_hidden, rho=float(lc["rho"]),
            noise_amplitude=float(lc["noise"]), seed=int(lc["elm_seed"]))))
    mode = {"fqrc-exact": "exact", "fqrc-sampled": "sampled",
            "fqrc-noisy": "noisy"}[lc["type"]]
    return capacity.FqrcLearner(
        reservoir, n_features=n_features, mode=mode,
        n_shots=int(lc["n_shots"]) if mode == "sampled" else None,
        noise_amplitude=float(lc["noise"]), cache=cache)


def calibrated_floor(config: dict, reservoir: Reservoir,
                     cache: dict) -> tuple[float, float]:
    """(eps_p_bits, knee_amplitude): from config if given, else calibrated."""
    if config["eps_p_bits"] is not None and config["knee_amplitude"] is not None:
        return float(config["eps_p_bits"]), float(config["knee_amplitude"])
    floor = capacity.estimate_precision_floor(
        lambda a: capacity.FqrcLearner(reservoir, n_features=int(config["n_w"]),
                                       mode="noisy", noise_amplitude=a,
                                       cache=cache),
        grid=capacity.default_grid(int(config["n_w"])),
        n_labellings=int(config["floor_labellings"]),
        seed=int(config["seed"]))
    knee = floor.knee_amplitude if floor.knee_amplitude is not None \
        else float(floor.amplitudes[-1])
    return floor.eps_p_bits, knee


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, fieldnames: list[str], rows: list[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in fieldnames})


def write_schema(path: Path, fieldnames: list[str], descriptions: dict):
    lines = [f"{name}: {descriptions[name]}" for name in fieldnames]
    path.write_text("\n".join(lines) + "\n")


CAPACITY_COLUMNS = ["N", "eps_mean", "eps_stderr", "C_direct_bits",
                    "C_norm_bits", "W_bits", "n_labellings", "seed"]
CAPACITY_DESCRIPTIONS = {
    "N": "number of random input/label pairs in the memorization task",
    "eps_mean": "mean normalized training error over labellings",
    "eps_stderr": "standard error of eps over labellings",
    "C_direct_bits": "direct capacity estimate max_N N log2(1/eps) for this sweep point",
    "C_norm_bits": "precision-normalized capacity (empty if not applicable)",
    "W_bits": "parameter information budget for this sweep point (empty if not applicable)",
    "n_labellings": "number of random labellings averaged",
    "seed": "experiment seed",
}


# ---------------------------------------------------------------------------
# Experiment kinds
# ---------------------------------------------------------------------------

def run_capacity_vs_nw(config: dict):
    reservoir = build_reservoir(config)
    cache: dict = {}
    eps_p, _ = calibrated_floor(config, reservoir, cache)
    seed = int(config["seed"])
    n_lab = int(config["n_labellings"])
    rows = []
    for n_w in config["sweep"]:
        n_w = int(n_w)
        learner = capacity.FqrcLearner(reservoir, n_features=n_w, cache=cache)
        report = capacity.capacity_normalized(
            learner, capacity.default_grid(n_w), eps_p,
            n_labellings=n_lab, seed=seed)
        report.w_bits = capacity.w_bits_uniform(n_w, eps_p)
        for row in report.csv_rows():
            rows.append({"n_w": n_w, **row})
    fields = ["n_w"] + CAPACITY_COLUMNS
    desc = {"n_w": "number of read-out features (effective parameters)",
            **CAPACITY_DESCRIPTIONS}
    return fields, rows, desc


def run_capacity_vs_ns(config: dict):
    reservoir = build_reservoir(config)
    cache: dict = {}
    seed = int(config["seed"])
    n_w = int(config["n_w"])
    n_lab = int(config["n_labellings"])
    grid = capacity.default_grid(n_w)
    sweep = sorted(int(v) for v in config["sweep"])
    rows = []
    bits_ref = None
    for n_s in sweep:
        learner = capacity.FqrcLearner(reservoir, n_features=n_w, mode="sampled",
                                       n_shots=n_s, cache=cache)
        report = capacity.capacity_direct(learner, grid, n_lab, seed)
        if bits_ref is None:  # anchor the shot budget at the first sweep point
            bits_ref = report.c_direct_bits / n_w
        report.w_bits = capacity.w_bits_sampled(n_w, n_s, sweep[0], bits_ref)
        for row in report.csv_rows():
            rows.append({"n_s": n_s, **row})
    fields = ["n_s"] + CAPACITY_COLUMNS
    desc = {"n_s": "detector shots per feature-vector estimate",
            **CAPACITY_DESCRIPTIONS}
    return fields, rows, desc


def run_capacity_vs_noise(config: dict):
    reservoir = build_reservoir(config)
    cache: dict = {}
    eps_p, _ = calibrated_floor(config, reservoir, cache)
    seed = int(config["seed"])
    n_w = int(config["n_w"])
    n_lab = int(config["n_labellings"])
    grid = capacity.default_grid(n_w)
    rows = []
    for amp in sorted(float(v) for v in config["sweep"]):
        learner = capacity.FqrcLearner(reservoir, n_features=n_w, mode="noisy",
                                       noise_amplitude=amp, cache=cache)
        report = capacity.capacity_direct(learner, grid, n_lab, seed)
        report.w_bits = capacity.w_bits_noisy(n_w, amp, eps_p)
        for row in report.csv_rows():
            rows.append({"noise_amplitude": amp, **row})
    fields = ["noise_amplitude"] + CAPACITY_COLUMNS
    desc = {"noise_amplitude": "uniform read-out noise amplitude",
            **CAPACITY_DESCRIPTIONS}
    return fields, rows, desc


def run_eps_p(config: dict):
    reservoir = build_reservoir(config)
    cache: dict = {}
    seed = int(config["seed"])
    n_w = int(config["n_w"])
    amps = sorted(float(v) for v in config["sweep"])
    rows = []
    grid = capacity.default_grid(n_w)
    families = [
        ("fqrc", lambda a: capacity.FqrcLearner(
            reservoir, n_features=n_w, mode="noisy", noise_amplitude=a,
            cache=cache)),
        ("elm", lambda a: capacity.ElmLearner(Elm(ElmConfig(
            n_hidden=int(config["learner"]["n_hidden"]), noise_amplitude=a,
            seed=int(config["learner"]["elm_seed"]))))),
    ]
    for name, make in families:
        floor = capacity.estimate_precision_floor(
            make, amplitudes=amps, grid=grid,
            n_labellings=int(config["floor_labellings"]), seed=seed)
        knee = "" if floor.knee_amplitude is None else floor.knee_amplitude
        for amp, c, bpp in zip(floor.amplitudes, floor.c_bits,
                               floor.bits_per_param):
            rows.append({"learner": name, "noise_amplitude": float(amp),
                         "C_direct_bits": float(c),
                         "bits_per_param": float(bpp),
                         "eps_p_bits": floor.eps_p_bits,
                         "knee_amplitude": knee,
                         "plateau_size": floor.plateau_size, "seed": seed})
    fields = ["learner", "noise_amplitude", "C_direct_bits", "bits_per_param",
              "eps_p_bits", "knee_amplitude", "plateau_size", "seed"]
    desc = {
        "learner": "learner family being calibrated (fqrc or elm)",
        "noise_amplitude": "injected uniform noise amplitude",
        "C_direct_bits": "direct capacity at this amplitude",
        "bits_per_param": "C_direct_bits divided by the argmax N",
        "eps_p_bits": "calibrated precision floor (smallest-amplitude plateau point)",
        "knee_amplitude": "first amplitude past the plateau (empty if none)",
        "plateau_size": "number of amplitudes in the detected plateau",
        "seed": "experiment seed",
    }
    return fields, rows, desc


def _task_nmse_point(learner, data, seed, tag):
    f_train = learner.feature_matrix(data.train.inputs,
                                     capacity.seed_key(seed, tag, "train"))
    weights = readout.fit(f_train, data.train.targets)
    f_train_eval = learner.feature_matrix(data.train.inputs,
                                          capacity.seed_key(seed, tag, "train-eval"))
    f_test = learner.feature_matrix(data.test.inputs,
                                    capacity.seed_key(seed, tag, "test"))
    train = readout.nmse(readout.predict(weights, f_train_eval),
                         data.train.targets)
    test = readout.nmse(readout.predict(weights, f_test), data.test.targets)
    return train, test


def run_task_nmse(config: dict):
    reservoir = build_reservoir(config)
    cache: dict = {}
    seed = int(config["seed"])
    tc = config["task"]
    spec = tasks.TaskSpec(kind="classical_named", function=tc["function"],
                          n_train=int(tc["n_train"]), n_test=int(tc["n_test"]),
                          seed=seed)
    data = tasks.make_dataset(spec)
    n_shots = int(tc["shots"])
    rows = []
    for n_w in config["sweep"]:
        n_w = int(n_w)
        for variant, learner in (
                ("exact", capacity.FqrcLearner(reservoir, n_features=n_w,
                                               cache=cache)),
                (str(n_shots), capacity.FqrcLearner(reservoir, n_features=n_w,
                                                    mode="sampled",
                                                    n_shots=n_shots,
                                                    cache=cache))):
            train, test = _task_nmse_point(learner, data, seed, f"{n_w}-{variant}")
            rows.append({"n_w": n_w, "n_s_or_exact": variant,
                         "nmse_train": train, "nmse_test": test, "seed": seed})
    fields = ["n_w", "n_s_or_exact", "nmse_train", "nmse_test", "seed"]
    desc = {
        "n_w": "number of read-out features",
        "n_s_or_exact": "'exact' for expectation values, else the shot count",
        "nmse_train": "normalized mean squared error on the training set",
        "nmse_test": "normalized mean squared error on the held-out test set",
        "seed": "experiment seed",
    }
    return fields, rows, desc


def run_generalize(config: dict):
    """Train/test NMSE on the named task as the training-set information T
    sweeps through the capacity C: memorization below C, generalization above.
    """
    reservoir = build_reservoir(config)
    cache: dict = {}
    eps_p, _ = calibrated_floor(config, reservoir, cache)
    seed = int(config["seed"])
    n_w = int(config["n_w"])
    tc = config["task"]
    c_bits = n_w * eps_p
    learner = capacity.FqrcLearner(reservoir, n_features=n_w, cache=cache)
    n_reps = int(config["n_labellings"])
    rows = []
    for n_train in sorted(int(v) for v in config["sweep"]):
        trains, tests = [], []
        for rep in range(n_reps):
            # independent dataset draws; the recorded NMSE is their mean
            rep_seed = seed * 1000 + rep
            spec = tasks.TaskSpec(kind="classical_named",
                                  function=tc["function"], n_train=n_train,
                                  n_test=int(tc["n_test"]), seed=rep_seed)
            data = tasks.make_dataset(spec)
            train, test = _task_nmse_point(learner, data, rep_seed,
                                           f"gen-{n_train}")
            trains.append(train)
            tests.append(test)
        rows.append({"T_bits": n_train * eps_p, "C_bits": c_bits,
                     "nmse_train": float(np.mean(trains)),
                     "nmse_test": float(np.mean(tests))})
    fields = ["T_bits", "C_bits", "nmse_train", "nmse_test"]
    desc = {
        "T_bits": "training-set information: n_train times the precision floor",
        "C_bits": "model capacity: n_w times the precision floor",
        "nmse_train": "training NMSE",
        "nmse_test": "held-out test NMSE",
    }
    return fields, rows, desc


def run_range_generalize(config: dict):
    """1-D function fits tested past the training range.

    Inputs are encoded against the extended test range, so the squeezer stays
    within its cap even for out-of-range test points.
    """
    seed = int(config["seed"])
    tc = config["task"]
    reservoir = build_reservoir(config)
    cache: dict = {}
    learner = capacity.FqrcLearner(reservoir, cache=cache)
    n = int(tc["n_points"])
    rows = []
    for kind in tc["one_d_kinds"]:
        spec = tasks.TaskSpec(kind="classical_1d", one_d_kind=kind,
                              extended_test=True, n_train=n, n_test=n, seed=seed)
        data = tasks.make_dataset(spec)
        f_train = learner.feature_matrix(data.train.inputs)
        weights = readout.fit(f_train, data.train.targets)
        for split, ds, raw in (("train", data.train, data.raw_train),
                               ("test", data.test, data.raw_test)):
            pred = readout.predict(weights, learner.feature_matrix(ds.inputs))
            for x, t, p in zip(raw, ds.targets, pred):
                rows.append({"function": kind, "split": split, "x": float(x),
                             "target": float(t), "prediction": float(p),
                             "seed": seed})
    fields = ["function", "split", "x", "target", "prediction", "seed"]
    desc = {
        "function": "1-D task function (linear or sinusoid)",
        "split": "'train' (in range) or 'test' (extends past the range)",
        "x": "raw scalar input before encoding",
        "target": "true function value",
        "prediction": "read-out prediction",
        "seed": "experiment seed",
    }
    return fields, rows, desc


def run_elm_baseline(config: dict):
    seed = int(config["seed"])
    n_lab = int(config["n_labellings"])
    lc = config["learner"]
    rows = []
    for n_hidden in sorted(int(v) for v in config["sweep"]):
        learner = capacity.ElmLearner(Elm(ElmConfig(
            n_hidden=n_hidden, rho=float(lc["rho"]),
            noise_amplitude=float(lc["noise"]), seed=int(lc["elm_seed"]))))
        report = capacity.capacity_direct(
            learner, capacity.default_grid(n_hidden), n_lab, seed)
        # double-precision storage budget: 52 usable bits per weight
        report.w_bits = capacity.w_bits_uniform(
            n_hidden, -math.log2(capacity.EPS_CLAMP))
        for row in report.csv_rows():
            rows.append({"n_hidden": n_hidden, **row})
    fields = ["n_hidden"] + CAPACITY_COLUMNS
    desc = {"n_hidden": "classical baseline hidden-layer width",
            **CAPACITY_DESCRIPTIONS}
    return fields, rows, desc


RUNNERS = {
    "capacity-vs-nw": run_capacity_vs_nw,
    "capacity-vs-ns": run_capacity_vs_ns,
    "capacity-vs-noise": run_capacity_vs_noise,
    "eps-p": run_eps_p,
    "task-nmse": run_task_nmse,
    "generalize": run_generalize,
    "range-generalize": run_range_generalize,
    "elm-baseline": run_elm_baseline,
}


# ---------------------------------------------------------------------------
# Run directory assembly
# ---------------------------------------------------------------------------

def default_output_root() -> Path:
    return Path(os.environ.get(OUT_ENV_VAR, "runs"))


def manifest_dict(config: dict) -> dict:
    return {
        "config": config,
        "versions": {
            "gbsqrc": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


def run_experiment(raw_config: dict, out_dir: str | Path | None = None) -> Path:
    """Run one experiment; returns the run directory containing
    <kind>.csv, <kind>.schema.txt, and manifest.json."""
    config, _ = resolve_config(raw_config)
    kind = config["kind"]
    if out_dir is None:
        out_dir = config["out"] if config["out"] is not None \
            else default_output_root() / kind
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fields, rows, desc = RUNNERS[kind](config)
    if not rows:
        raise RuntimeError(f"experiment {kind} produced no rows")
    write_csv(out_dir / f"{kind}.csv", fields, rows)
    write_schema(out_dir / f"{kind}.schema.txt", fields, desc)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out_dir
