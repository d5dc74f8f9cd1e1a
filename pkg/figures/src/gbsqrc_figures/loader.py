"""CSV + schema loading with loud validation.

Each experiment directory holds `<kind>.csv` with a sibling `<kind>.schema.txt`
of "name: description" lines in header order.  A table is loaded as a dict of
column name -> list of raw strings; `column` converts on demand so empty cells
only fail where a numeric column is actually consumed.
"""

from __future__ import annotations

import csv
from pathlib import Path


class SchemaError(Exception):
    """CSV file missing, empty, or inconsistent with its schema."""


def read_schema(path: Path) -> list[str]:
    if not path.exists():
        raise SchemaError(f"schema file not found: {path}")
    names = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if ":" not in line:
            raise SchemaError(f"malformed schema line in {path}: {line!r}")
        names.append(line.split(":", 1)[0].strip())
    if not names:
        raise SchemaError(f"schema file is empty: {path}")
    return names


def load_table(in_dir: str | Path, kind: str,
               required: tuple[str, ...] = ()) -> dict[str, list[str]]:
    in_dir = Path(in_dir)
    csv_path = in_dir / f"{kind}.csv"
    if not csv_path.exists():
        raise SchemaError(f"input CSV not found: {csv_path}")
    names = read_schema(in_dir / f"{kind}.schema.txt")
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"CSV has no header: {csv_path}") from None
        if header != names:
            raise SchemaError(
                f"{csv_path} header {header} does not match schema {names}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"CSV has no data rows: {csv_path}")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{csv_path} is missing columns: {missing}")
    table = {name: [] for name in header}
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"ragged row in {csv_path}: {row}")
        for name, cell in zip(header, row):
            table[name].append(cell)
    return table


def column(table: dict[str, list[str]], name: str, dtype=float) -> list:
    if name not in table:
        raise SchemaError(f"missing column: {name}")
    try:
        return [dtype(cell) for cell in table[name]]
    except ValueError as exc:
        raise SchemaError(f"column {name} is not {dtype.__name__}: {exc}") \
            from None


def where(table: dict[str, list[str]], **conditions) -> dict[str, list[str]]:
    """Rows matching all string-equality conditions, as a new table."""
    keep = [i for i in range(len(next(iter(table.values()))))
            if all(table[k][i] == v for k, v in conditions.items())]
    return {name: [cells[i] for i in keep] for name, cells in table.items()}
