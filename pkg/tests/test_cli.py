"""Unit tests for config resolution, experiment persistence, and the CLI."""

import csv
import json

import numpy as np
import pytest

from gbsqrc import cli, experiments


def test_resolve_config_defaults_listed():
    resolved, defaulted = experiments.resolve_config({"kind": "task-nmse"})
    assert resolved["seed"] == 0
    assert resolved["sweep"] == experiments.DEFAULT_SWEEPS["task-nmse"]
    assert "seed" in defaulted
    assert "learner.type" in defaulted
    assert "kind" not in defaulted


def test_resolve_config_rejects_unknown_fields():
    with pytest.raises(experiments.ConfigError):
        experiments.resolve_config({"kind": "task-nmse", "bogus": 1})
    with pytest.raises(experiments.ConfigError):
        experiments.resolve_config({"kind": "task-nmse",
                                    "learner": {"typ": "elm"}})


def test_resolve_config_validates():
    with pytest.raises(experiments.ConfigError):
        experiments.resolve_config({"kind": "not-an-experiment"})
    with pytest.raises(experiments.ConfigError):
        experiments.resolve_config({"kind": "capacity-vs-nw", "n_w": 32})
    with pytest.raises(experiments.ConfigError):
        experiments.resolve_config({"kind": "capacity-vs-nw", "sweep": [40]})
    with pytest.raises(experiments.ConfigError):
        experiments.resolve_config({"kind": "task-nmse",
                                    "learner": {"type": "svm"}})


def test_ini_config_parsing(tmp_path):
    path = tmp_path / "config.ini"
    path.write_text(
        "[experiment]\n"
        "kind = elm-baseline\n"
        "seed = 9\n"
        "sweep = 8, 12\n"
        "n_labellings = 2\n"
        "[learner]\n"
        "type = elm\n"
        "rho = 1.5\n")
    raw = cli.load_config(path)
    assert raw["kind"] == "elm-baseline"
    assert raw["seed"] == 9
    assert raw["sweep"] == [8, 12]
    assert raw["learner"]["rho"] == 1.5


def test_missing_config_file():
    with pytest.raises(experiments.ConfigError):
        cli.load_config("/nonexistent/config.ini")


def test_run_writes_csv_schema_manifest(tmp_path):
    out = tmp_path / "run"
    config = {"kind": "elm-baseline", "seed": 1, "sweep": [8],
              "n_labellings": 2, "learner": {"type": "elm"}}
    run_dir = experiments.run_experiment(config, out)
    csv_path = run_dir / "elm-baseline.csv"
    schema_path = run_dir / "elm-baseline.schema.txt"
    manifest_path = run_dir / "manifest.json"
    assert csv_path.exists() and schema_path.exists() and manifest_path.exists()
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert rows and rows[0]["n_hidden"] == "8"
    # schema names every CSV column in order
    schema_cols = [line.split(":")[0] for line in
                   schema_path.read_text().strip().splitlines()]
    assert schema_cols == list(rows[0].keys())
    manifest = json.loads(manifest_path.read_text())
    assert manifest["config"]["kind"] == "elm-baseline"
    assert "numpy" in manifest["versions"]


def test_run_deterministic_bytes(tmp_path):
    config = {"kind": "elm-baseline", "seed": 3, "sweep": [6],
              "n_labellings": 2, "learner": {"type": "elm"}}
    d1 = experiments.run_experiment(config, tmp_path / "a")
    d2 = experiments.run_experiment(config, tmp_path / "b")
    assert (d1 / "elm-baseline.csv").read_bytes() == \
        (d2 / "elm-baseline.csv").read_bytes()


def test_manifest_rerun_reproduces_csv(tmp_path):
    config = {"kind": "elm-baseline", "seed": 5, "sweep": [6],
              "n_labellings": 2, "learner": {"type": "elm"}}
    d1 = experiments.run_experiment(config, tmp_path / "a")
    rc = cli.main(["run", "--config", str(d1 / "manifest.json"),
                   "--out", str(tmp_path / "b")])
    assert rc == 0
    assert (d1 / "elm-baseline.csv").read_bytes() == \
        (tmp_path / "b" / "elm-baseline.csv").read_bytes()


def test_cli_validate_lists_defaults(capsys):
    rc = cli.main(["validate", "--experiment", "task-nmse"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "defaulted fields:" in out
    assert "learner.type" in out
    assert '"kind": "task-nmse"' in out


def test_cli_flag_overrides(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nkind = elm-baseline\nseed = 1\n"
                    "sweep = 6\nn_labellings = 2\n[learner]\ntype = elm\n")
    out = tmp_path / "o"
    rc = cli.main(["run", "--config", str(path), "--seed", "7",
                   "--out", str(out)])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 7


def test_cli_manifest_subcommand(tmp_path, capsys):
    config = {"kind": "elm-baseline", "seed": 2, "sweep": [6],
              "n_labellings": 2, "learner": {"type": "elm"}}
    run_dir = experiments.run_experiment(config, tmp_path / "r")
    rc = cli.main(["manifest", str(run_dir)])
    assert rc == 0
    assert '"kind": "elm-baseline"' in capsys.readouterr().out
    rc = cli.main(["manifest", str(tmp_path / "missing")])
    assert rc == 2


def test_cli_invalid_config_exit_code(capsys):
    rc = cli.main(["validate", "--config", "/nonexistent.ini"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_out_env_var_default(monkeypatch, tmp_path):
    monkeypatch.setenv(experiments.OUT_ENV_VAR, str(tmp_path / "envout"))
    assert experiments.default_output_root() == tmp_path / "envout"


def test_range_generalize_rows(tmp_path):
    config = {"kind": "range-generalize", "seed": 0,
              "task": {"n_points": 20, "one_d_kinds": ["linear"]}}
    run_dir = experiments.run_experiment(config, tmp_path / "rg")
    with open(run_dir / "range-generalize.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 40  # 20 train + 20 test
    xs = np.array([float(r["x"]) for r in rows if r["split"] == "test"])
    assert xs.max() > 10.0  # out-of-range points present
