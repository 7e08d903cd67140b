"""File formats: loading of the CSV inputs and atomic writing of reports.

Input problems raise :class:`InputError` (CLI exit code 2) with file and line
context; mismatches *between* otherwise valid files raise
:class:`ConsistencyError` (exit code 3).
"""

from __future__ import annotations

import csv
import json
import os
import re
import tempfile

import numpy as np

from .core import DecisionProblem, Prior
from .scenarios import PortfolioBook, ReturnPanel

__all__ = [
    "ConsistencyError",
    "InputError",
    "NOT_BAYES",
    "INADMISSIBLE",
    "atomic_write_text",
    "format_number",
    "load_costs",
    "load_daily",
    "load_monthly",
    "load_priors",
    "load_utilities",
    "load_weights",
    "write_json",
    "write_rows",
]

NOT_BAYES = "NOT_BAYES"
INADMISSIBLE = "INADMISSIBLE"

_DAY_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class InputError(ValueError):
    """A file or parameter the user supplied is malformed."""


class ConsistencyError(ValueError):
    """Two individually valid inputs do not fit together."""


def _read_rows(path) -> list[tuple[int, list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return _rows_from_stream(fh, str(path))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _rows_from_stream(stream, source: str) -> list[tuple[int, list[str]]]:
    rows = []
    reader = csv.reader(stream)
    try:
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            rows.append((lineno, [cell.strip() for cell in row]))
    except csv.Error as exc:
        raise InputError(f"{source}:{reader.line_num}: {exc}") from exc
    if not rows:
        raise InputError(f"{source}: file is empty")
    return rows


def _label(source: str, lineno: int, cell: str, what: str) -> str:
    if not cell:
        raise InputError(f"{source}:{lineno}: empty {what}")
    if any(ch in cell for ch in ',"\n'):
        raise InputError(f"{source}:{lineno}: {what} {cell!r} contains reserved characters")
    return cell


def _number(source: str, lineno: int, cell: str, what: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise InputError(f"{source}:{lineno}: {what} {cell!r} is not a number") from None


def _expect_width(source: str, lineno: int, row: list[str], width: int) -> None:
    if len(row) != width:
        raise InputError(f"{source}:{lineno}: expected {width} fields, got {len(row)}")


def load_utilities(path) -> DecisionProblem:
    """`act,<state...>` rows of utilities."""
    rows = _read_rows(path)
    source = str(path)
    lineno, header = rows[0]
    if len(header) < 2 or header[0] != "act":
        raise InputError(f"{source}:{lineno}: header must be 'act,<state>,...'")
    states = [_label(source, lineno, s, "state name") for s in header[1:]]
    if len(set(states)) != len(states):
        raise InputError(f"{source}:{lineno}: duplicate state names")
    acts, matrix = [], []
    for lineno, row in rows[1:]:
        _expect_width(source, lineno, row, len(states) + 1)
        act = _label(source, lineno, row[0], "act name")
        if act in acts:
            raise InputError(f"{source}:{lineno}: duplicate act {act!r}")
        acts.append(act)
        matrix.append([_number(source, lineno, c, "utility") for c in row[1:]])
    if not acts:
        raise InputError(f"{source}: no act rows")
    return DecisionProblem(acts, states, np.array(matrix))


def load_priors(path) -> tuple[tuple[str, ...], list[Prior]]:
    """`prior,<state...>` rows of probability masses; returns (states, priors)."""
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_priors(fh, str(path))


def parse_priors(stream, source: str) -> tuple[tuple[str, ...], list[Prior]]:
    rows = _rows_from_stream(stream, source)
    lineno, header = rows[0]
    if len(header) < 2 or header[0] != "prior":
        raise InputError(f"{source}:{lineno}: header must be 'prior,<state>,...'")
    states = tuple(_label(source, lineno, s, "state name") for s in header[1:])
    priors = []
    seen = set()
    for lineno, row in rows[1:]:
        _expect_width(source, lineno, row, len(states) + 1)
        name = _label(source, lineno, row[0], "prior name")
        if name in seen:
            raise InputError(f"{source}:{lineno}: duplicate prior {name!r}")
        seen.add(name)
        mass = [_number(source, lineno, c, "probability") for c in row[1:]]
        try:
            priors.append(Prior(name, mass))
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: {exc}") from exc
    if not priors:
        raise InputError(f"{source}: no prior rows")
    return states, priors


def load_costs(path) -> dict[str, float]:
    """`act,cost` rows of nonnegative costs."""
    rows = _read_rows(path)
    source = str(path)
    lineno, header = rows[0]
    if header != ["act", "cost"]:
        raise InputError(f"{source}:{lineno}: header must be 'act,cost'")
    costs: dict[str, float] = {}
    for lineno, row in rows[1:]:
        _expect_width(source, lineno, row, 2)
        act = _label(source, lineno, row[0], "act name")
        if act in costs:
            raise InputError(f"{source}:{lineno}: duplicate act {act!r}")
        value = _number(source, lineno, row[1], "cost")
        if value < 0.0:
            raise InputError(f"{source}:{lineno}: cost must be nonnegative, got {value!r}")
        costs[act] = value
    if not costs:
        raise InputError(f"{source}: no cost rows")
    return costs


def load_weights(path) -> PortfolioBook:
    """`portfolio,<asset...>` rows of convex weights."""
    rows = _read_rows(path)
    source = str(path)
    lineno, header = rows[0]
    if len(header) < 2 or header[0] != "portfolio":
        raise InputError(f"{source}:{lineno}: header must be 'portfolio,<asset>,...'")
    assets = tuple(_label(source, lineno, a, "asset name") for a in header[1:])
    names, weights = [], []
    for lineno, row in rows[1:]:
        _expect_width(source, lineno, row, len(assets) + 1)
        names.append(_label(source, lineno, row[0], "portfolio name"))
        weights.append([_number(source, lineno, c, "weight") for c in row[1:]])
    if not names:
        raise InputError(f"{source}: no portfolio rows")
    try:
        return PortfolioBook(tuple(names), assets, np.array(weights))
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from exc


def load_monthly(path) -> ReturnPanel:
    """`date,<asset...>[,market_vol]` rows of monthly returns.

    A trailing ``market_vol`` column is split off as the panel's precomputed
    volatility series.
    """
    rows = _read_rows(path)
    source = str(path)
    lineno, header = rows[0]
    if len(header) < 2 or header[0] != "date":
        raise InputError(f"{source}:{lineno}: header must be 'date,<asset>,...'")
    columns = header[1:]
    has_vol = columns and columns[-1] == "market_vol"
    assets = tuple(
        _label(source, lineno, a, "asset name")
        for a in (columns[:-1] if has_vol else columns)
    )
    if not assets:
        raise InputError(f"{source}:{lineno}: no asset columns")
    months, values, vols = [], [], []
    incomplete = []
    for lineno, row in rows[1:]:
        _expect_width(source, lineno, row, len(columns) + 1)
        month = row[0]
        months.append(month)
        cells = row[1:1 + len(assets)]
        if any(not c for c in cells):
            incomplete.append(month)
            values.append([0.0] * len(assets))
        else:
            values.append([_number(source, lineno, c, "return") for c in cells])
        if has_vol:
            vols.append(_number(source, lineno, row[-1], "volatility"))
    if incomplete:
        raise InputError(
            f"{source}: months with missing asset returns: {', '.join(incomplete)}"
        )
    try:
        return ReturnPanel(
            tuple(months), assets, np.array(values),
            volatility=np.array(vols) if has_vol else None,
        )
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from exc


def load_daily(path) -> tuple[str, dict[str, np.ndarray]]:
    """`date,<market>` rows of daily returns, grouped by month."""
    rows = _read_rows(path)
    source = str(path)
    lineno, header = rows[0]
    if len(header) != 2 or header[0] != "date":
        raise InputError(f"{source}:{lineno}: header must be 'date,<market>'")
    market = _label(source, lineno, header[1], "market name")
    grouped: dict[str, list[float]] = {}
    for lineno, row in rows[1:]:
        _expect_width(source, lineno, row, 2)
        day = row[0]
        if not _DAY_RE.match(day):
            raise InputError(f"{source}:{lineno}: malformed date {day!r} (expected YYYY-MM-DD)")
        grouped.setdefault(day[:7], []).append(_number(source, lineno, row[1], "return"))
    if not grouped:
        raise InputError(f"{source}: no daily rows")
    return market, {month: np.array(obs) for month, obs in grouped.items()}


def format_number(value: float) -> str:
    """Report formatting: 9 significant digits."""
    return f"{value:.9g}"


def _render_cell(value) -> str:
    if isinstance(value, str):
        return f'"{value}"' if value in (NOT_BAYES, INADMISSIBLE) else value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_number(float(value))


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows(path, header: list[str], rows) -> None:
    """Write a CSV report; floats at 9 significant digits, sentinels quoted."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_render_cell(cell) for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_data_rows(path, header: list[str], rows) -> None:
    """Write an interchange CSV; floats keep full round-trip precision."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(repr(float(c)) if isinstance(c, (float, np.floating)) else str(c) for c in row)
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, document: dict) -> None:
    atomic_write_text(path, json.dumps(document, indent=2) + "\n")
