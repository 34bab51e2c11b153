"""Strict readers for the solver's CSV/JSON artifacts.

Every reader validates the header against the declared schema and reports
the exact column diff on mismatch; data rows are typed. The plotting layer
never recomputes physics, so a malformed file is an error, never a guess.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(ValueError):
    """A data file does not match its declared schema."""


BRANCH_COLUMNS = [
    "g0", "phi_s", "s_x", "c_s_printed", "c_s_mconsistent",
    "stable", "cavity_phase", "spin_phase", "re_as", "im_as",
]
TRACE_COLUMNS = ["g0", "forward_phi", "backward_phi"]
PHASE_COLUMNS = ["axis", "value", "g1", "g2", "merged"]
FLUCT_COLUMNS = [
    "g0", "branch", "re_omega1", "im_omega1", "re_omega2", "im_omega2",
    "n_fluct", "divergent",
]

_STRING_COLUMNS = {"axis", "branch", "cavity_phase", "spin_phase"}
_BOOL_COLUMNS = {"stable", "merged", "divergent"}


def _cell(column: str, raw: str, path: Path, line: int):
    if raw == "":
        return None
    if column in _STRING_COLUMNS:
        return raw
    if column in _BOOL_COLUMNS:
        if raw in ("true", "false"):
            return raw == "true"
        raise SchemaError(f"{path}:{line}: column '{column}' must be true/false, got {raw!r}")
    try:
        return float(raw)
    except ValueError as exc:
        raise SchemaError(f"{path}:{line}: column '{column}': {exc}") from exc


def read_rows(path: Path, columns: list) -> list:
    """Read a CSV against ``columns``; returns a list of dicts."""
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {columns}") from None
        if header != columns:
            missing = [c for c in columns if c not in header]
            unexpected = [c for c in header if c not in columns]
            raise SchemaError(
                f"{path}: header mismatch: missing columns {missing}, "
                f"unexpected columns {unexpected}, expected order {columns}"
            )
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise SchemaError(f"{path}:{i}: expected {len(columns)} cells, got {len(row)}")
            rows.append({c: _cell(c, v, path, i) for c, v in zip(columns, row)})
    return rows


def read_exponents(path: Path) -> list:
    """Read the exponent-fit JSON: a list of {side, g_c, slope, r2, window}."""
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    try:
        fits = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    required = {"side", "g_c", "slope", "r2", "window"}
    if not isinstance(fits, list):
        raise SchemaError(f"{path}: expected a list of fits")
    for fit in fits:
        gap = required - set(fit)
        if gap:
            raise SchemaError(f"{path}: fit entry missing keys {sorted(gap)}")
    return fits
