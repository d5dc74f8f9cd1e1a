"""Command-line experiment runner: `run`, `validate`, and `manifest`.

Configs are plain INI text (section/key = value) or the JSON manifest of a
previous run; CLI flags override the file.  Runs are sequential and fully
deterministic from (config, seed), so re-running a manifest reproduces its
CSV byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

from .experiments import (
    ConfigError,
    EXPERIMENT_KINDS,
    manifest_dict,
    resolve_config,
    run_experiment,
)

LIST_KEYS = {"sweep", "one_d_kinds"}
NONE_WORDS = {"none", "null", ""}


def _coerce(value: str):
    text = value.strip()
    if text.lower() in NONE_WORDS:
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_value(key: str, value: str):
    if key in LIST_KEYS:
        items = [v for v in (s.strip() for s in value.split(",")) if v]
        return [_coerce(v) for v in items]
    return _coerce(value)


def load_config(path: str | Path) -> dict:
    """INI config or JSON manifest -> raw config dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return doc["config"] if "config" in doc else doc
    parser = configparser.ConfigParser()
    parser.read(path)
    raw: dict = {}
    for section in parser.sections():
        entries = {k: _parse_value(k, v) for k, v in parser.items(section)}
        if section == "experiment":
            raw.update(entries)
        else:
            raw[section] = entries
    return raw


def apply_overrides(raw: dict, args) -> dict:
    if args.experiment is not None:
        raw["kind"] = args.experiment
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = args.out
    return raw


def _add_common(parser):
    parser.add_argument("--config", help="INI config file or manifest.json")
    parser.add_argument("--experiment", choices=EXPERIMENT_KINDS,
                        help="experiment kind (overrides the config file)")
    parser.add_argument("--seed", type=int, help="experiment seed override")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for interface stability; execution is "
                             "sequential and results are identical for any value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbsqrc",
        description="quantum-reservoir capacity experiments to CSV")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment to a CSV directory")
    _add_common(run_p)
    val_p = sub.add_parser("validate", help="resolve and check a config")
    _add_common(val_p)
    man_p = sub.add_parser("manifest", help="print the resolved config of a run")
    man_p.add_argument("run_dir", help="run directory containing manifest.json")
    return parser


def _gather(args) -> dict:
    raw = load_config(args.config) if args.config else {}
    return apply_overrides(raw, args)


def cmd_run(args) -> int:
    out_dir = run_experiment(_gather(args))
    print(f"run complete: {out_dir}")
    return 0


def cmd_validate(args) -> int:
    resolved, defaulted = resolve_config(_gather(args))
    print(json.dumps(manifest_dict(resolved), indent=2, sort_keys=True))
    if defaulted:
        print("defaulted fields:")
        for field in defaulted:
            print(f"  {field}")
    else:
        print("defaulted fields: none")
    return 0


def cmd_manifest(args) -> int:
    path = Path(args.run_dir) / "manifest.json"
    if not path.exists():
        raise ConfigError(f"no manifest.json under {args.run_dir}")
    print(json.dumps(json.loads(path.read_text()), indent=2, sort_keys=True))
    return 0


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "manifest": cmd_manifest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
