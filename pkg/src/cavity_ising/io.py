"""Deterministic CSV/JSON writers and the data-file schemas.

All floats are written with ``repr`` (shortest round-trip form) so that
identical computations produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

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


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def branch_row(point) -> list:
    return [
        point.g0, point.phi_s, point.s_x, point.c_s_printed, point.c_s,
        point.stable, point.cavity_phase.value, point.spin_phase.value,
        point.a_s.real, point.a_s.imag,
    ]


def fluct_row(g0: float, branch_id: str, spec) -> list:
    return [
        g0, branch_id,
        spec.omega[0].real, spec.omega[0].imag,
        spec.omega[1].real, spec.omega[1].imag,
        None if spec.divergent else spec.n_fluct,
        spec.divergent,
    ]


def write_table(path: Path, columns: list, rows: list, fmt: str = "csv") -> Path:
    """Write rows either as CSV or as a JSON list of objects."""
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(format_cell(v) for v in row) for row in rows]
        path = path.with_suffix(".csv")
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        payload = [
            {c: (None if v is None else v) for c, v in zip(columns, row)}
            for row in rows
        ]
        path = path.with_suffix(".json")
        path.write_text(dumps(payload) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True)


def write_json(path: Path, obj) -> Path:
    path.write_text(dumps(obj) + "\n")
    return path
