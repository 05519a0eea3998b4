"""Result bundles: CSV tables plus a ``key = value`` summary.

Floats are written with 17 significant digits so they re-read bit-exactly.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1

TRAJECTORY_COLUMNS = ("t", "V", "dVdt_est", "bound", "err_norm", "cross_h_norm_sq")
HYSTERESIS_COLUMNS = ("t", "uhat", "m_out")
LOOP_COLUMNS = ("component", "omega", "uhat", "m_out")


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"table rows have shape {rows.shape}, columns {self.columns}")
        self.rows = rows
        self.columns = tuple(self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


@dataclass
class ResultBundle:
    config_text: str
    tables: dict[str, Table] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION


def trajectory_table(samples: Sequence) -> Table:
    rows = [[getattr(s, c) for c in TRAJECTORY_COLUMNS] for s in samples]
    return Table(TRAJECTORY_COLUMNS, np.array(rows, dtype=float).reshape(len(rows), len(TRAJECTORY_COLUMNS)))


def hysteresis_table(run) -> Table:
    return Table(HYSTERESIS_COLUMNS, np.column_stack([run.t, run.uhat, run.m_out]))


def loops_table(runs: Iterable) -> Table:
    blocks = []
    for run in runs:
        u, y = run.final_period()
        blocks.append(np.column_stack([np.full(len(u), run.component), np.full(len(u), run.omega), u, y]))
    rows = np.vstack(blocks) if blocks else np.empty((0, len(LOOP_COLUMNS)))
    return Table(LOOP_COLUMNS, rows)


def omega_label(omega: float) -> str:
    return format(omega, "g")


def _summary_value(v: Any) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


_INT = re.compile(r"^[+-]?\d+$")


def _parse_summary_value(s: str) -> Any:
    if s == "none":
        return None
    if s in ("true", "false"):
        return s == "true"
    if _INT.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        return s


def write_results(bundle: ResultBundle, out_dir) -> list[Path]:
    """Write ``config.txt``, ``summary.txt`` and one CSV per table."""
    out = Path(out_dir)
    written = []
    path = out
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "config.txt"
        path.write_text(bundle.config_text, encoding="utf-8", newline="\n")
        written.append(path)
        path = out / "summary.txt"
        lines = [f"schema_version = {bundle.schema_version}"]
        lines += [f"{k} = {_summary_value(v)}" for k, v in bundle.summary.items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        written.append(path)
        for name, table in bundle.tables.items():
            path = out / f"{name}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(table.columns)
                for row in table.rows:
                    w.writerow([fmt_float(v) for v in row])
            written.append(path)
    except OSError as exc:
        raise OSError(f"could not write results to {path}: {exc.strerror or exc}") from exc
    return written


def read_csv(path) -> Table:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return Table(tuple(header), np.array(rows, dtype=float).reshape(len(rows), len(header)))


def read_results(out_dir) -> ResultBundle:
    out = Path(out_dir)
    summary: dict[str, Any] = {}
    version = SCHEMA_VERSION
    for line in (out / "summary.txt").read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, val = (p.strip() for p in line.partition("="))
        if key == "schema_version":
            version = int(val)
        else:
            summary[key] = _parse_summary_value(val)
    tables = {
        p.relative_to(out).with_suffix("").as_posix(): read_csv(p) for p in sorted(out.rglob("*.csv"))
    }
    return ResultBundle(
        config_text=(out / "config.txt").read_text(encoding="utf-8"),
        tables=tables,
        summary=summary,
        schema_version=version,
    )
