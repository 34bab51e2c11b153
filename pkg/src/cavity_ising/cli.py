"""Command-line entry point.

Dispatches the sweep / branches / phase / fluct / validate tasks from a
strict INI-style config (sections per task, unknown keys rejected) and
writes deterministic CSV/JSON artifacts plus a ``run.json`` manifest.

Exit codes: 0 success, 1 validation-item failure, 2 config error,
3 numerical failure (the failing operation is named on stderr).
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import chain
from .chain import Finite, THERMODYNAMIC
from .errors import CavityIsingError, ConfigError, NumericalError, ParameterError
from .fluct import Side, critical_exponent_fit, spectrum
from .io import (
    BRANCH_COLUMNS, FLUCT_COLUMNS, PHASE_COLUMNS, TRACE_COLUMNS,
    branch_row, fluct_row, write_json, write_table,
)
from .phase import Axis, boundary_vs_parameter, detuning_minimum_check
from .steady import (
    SystemParams, critical_points, find_fixed_points, stable_superradiant_branch,
    steady_field_amplitude, sweep_hysteresis, vacuum_branch,
)

TASKS = ("sweep", "branches", "phase", "fluct", "validate")

# Fig.-2-style defaults: a bare run reproduces the central hysteresis data
DEFAULT_PARAMS = {
    "detuning": 0.8,
    "loss": 0.5,
    "splitting": 0.3,
    "coupling": 1.0,
    "drive": 1.0,
    "sites": 200,
    "drive_phase": 0.0,
}

_SCHEMA = {
    "params": {
        "detuning": float, "loss": float, "splitting": float, "coupling": float,
        "drive": float, "sites": str, "drive_phase": float,
    },
    "sweep": {"g0_min": float, "g0_max": float, "points": int},
    "branches": {"g0": float},
    "phase": {
        "axis": str, "min": float, "max": float, "points": int,
        "check_minimum": str, "eps_list": str,
    },
    "fluct": {
        "g0_min": float, "g0_max": float, "points": int, "samples": int,
        "window_g1": str, "window_g2": str,
    },
    "validate": {},
}

_AXIS_RANGES = {
    Axis.DETUNING: (0.05, 2.0),
    Axis.LOSS: (0.05, 2.0),
    Axis.SPLITTING_RATIO: (0.1, 2.0),
}


@dataclass
class RunConfig:
    params: SystemParams
    task: str
    output_dir: Path
    threads: int = 1
    fmt: str = "csv"
    sweep_g0_min: float = 0.0
    sweep_g0_max: float = 3.0
    sweep_points: int = 301
    branches_g0: Optional[float] = None
    phase_axis: str = "all"
    phase_min: Optional[float] = None
    phase_max: Optional[float] = None
    phase_points: int = 40
    phase_check_minimum: bool = True
    phase_eps_list: tuple = (0.01, 0.02, 0.04)
    fluct_g0_min: Optional[float] = None
    fluct_g0_max: Optional[float] = None
    fluct_points: int = 200
    fluct_samples: int = 24
    fluct_window_g1: Optional[tuple] = None
    fluct_window_g2: Optional[tuple] = None


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"key '{key}' must be a boolean, got {raw!r}")


def _parse_pair(raw: str, key: str) -> tuple:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"key '{key}' must be two comma-separated numbers, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"key '{key}': {exc}") from exc


def _parse_size(raw) -> object:
    text = str(raw).strip().lower()
    if text in ("inf", "infinite", "thermodynamic"):
        return THERMODYNAMIC
    try:
        return Finite(int(text))
    except ValueError as exc:
        raise ConfigError(f"sites must be an even integer or 'thermodynamic', got {raw!r}") from exc


def load_config(path: Optional[Path], task: str, output_dir: Path,
                threads: int = 1, fmt: str = "csv") -> RunConfig:
    """Parse and validate a config file; unknown sections or keys are errors."""
    raw: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section '{section}'")
            known = _SCHEMA[section]
            raw[section] = {}
            for key, value in parser.items(section):
                if key not in known:
                    raise ConfigError(f"unknown config key '{key}' in section [{section}]")
                caster = known[key]
                if caster in (float, int):
                    try:
                        raw[section][key] = caster(value)
                    except ValueError as exc:
                        raise ConfigError(f"key '{key}': {exc}") from exc
                else:
                    raw[section][key] = value

    p = dict(DEFAULT_PARAMS)
    p.update(raw.get("params", {}))
    try:
        params = SystemParams(
            detuning=float(p["detuning"]),
            loss=float(p["loss"]),
            splitting=float(p["splitting"]),
            coupling=float(p["coupling"]),
            drive=float(p["drive"]),
            size=_parse_size(p["sites"]),
            drive_phase=float(p["drive_phase"]),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    cfg = RunConfig(params=params, task=task, output_dir=output_dir,
                    threads=threads, fmt=fmt)
    sweep = raw.get("sweep", {})
    cfg.sweep_g0_min = sweep.get("g0_min", cfg.sweep_g0_min)
    cfg.sweep_g0_max = sweep.get("g0_max", cfg.sweep_g0_max)
    cfg.sweep_points = sweep.get("points", cfg.sweep_points)
    cfg.branches_g0 = raw.get("branches", {}).get("g0")
    phase = raw.get("phase", {})
    cfg.phase_axis = phase.get("axis", cfg.phase_axis)
    cfg.phase_min = phase.get("min", cfg.phase_min)
    cfg.phase_max = phase.get("max", cfg.phase_max)
    cfg.phase_points = phase.get("points", cfg.phase_points)
    if "check_minimum" in phase:
        cfg.phase_check_minimum = _parse_bool(phase["check_minimum"], "check_minimum")
    if "eps_list" in phase:
        parts = [s.strip() for s in phase["eps_list"].split(",") if s.strip()]
        try:
            cfg.phase_eps_list = tuple(float(s) for s in parts)
        except ValueError as exc:
            raise ConfigError(f"key 'eps_list': {exc}") from exc
    fluct = raw.get("fluct", {})
    cfg.fluct_g0_min = fluct.get("g0_min", cfg.fluct_g0_min)
    cfg.fluct_g0_max = fluct.get("g0_max", cfg.fluct_g0_max)
    cfg.fluct_points = fluct.get("points", cfg.fluct_points)
    cfg.fluct_samples = fluct.get("samples", cfg.fluct_samples)
    if "window_g1" in fluct:
        cfg.fluct_window_g1 = _parse_pair(fluct["window_g1"], "window_g1")
    if "window_g2" in fluct:
        cfg.fluct_window_g2 = _parse_pair(fluct["window_g2"], "window_g2")

    if cfg.sweep_points < 2 or cfg.phase_points < 2 or cfg.fluct_points < 2:
        raise ConfigError("grid point counts must be >= 2")
    if cfg.phase_axis not in ("all", *(a.value for a in Axis)):
        raise ConfigError(f"unknown phase axis {cfg.phase_axis!r}")
    return cfg


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


def run_sweep(cfg: RunConfig) -> list:
    grid = np.linspace(cfg.sweep_g0_min, cfg.sweep_g0_max, cfg.sweep_points)
    result = sweep_hysteresis(cfg.params, grid, threads=cfg.threads)
    rows = [branch_row(p) for points in result.branches for p in points]
    out1 = write_table(cfg.output_dir / "sweep", BRANCH_COLUMNS, rows, cfg.fmt)
    trace_rows = [
        [float(g), float(f), float(b)]
        for g, f, b in zip(result.g0_grid, result.forward, result.backward)
    ]
    out2 = write_table(cfg.output_dir / "traces", TRACE_COLUMNS, trace_rows, cfg.fmt)
    return [out1, out2]


def run_branches(cfg: RunConfig) -> list:
    params = cfg.params if cfg.branches_g0 is None else replace(cfg.params, drive=cfg.branches_g0)
    rows = [branch_row(p) for p in find_fixed_points(params)]
    return [write_table(cfg.output_dir / "branches", BRANCH_COLUMNS, rows, cfg.fmt)]


def run_phase(cfg: RunConfig) -> list:
    axes = list(Axis) if cfg.phase_axis == "all" else [Axis(cfg.phase_axis)]
    outputs = []
    for axis in axes:
        lo, hi = _AXIS_RANGES[axis]
        if cfg.phase_min is not None:
            lo = cfg.phase_min
        if cfg.phase_max is not None:
            hi = cfg.phase_max
        grid = np.linspace(lo, hi, cfg.phase_points)
        boundary = boundary_vs_parameter(cfg.params, axis, grid, threads=cfg.threads)
        rows = [
            [axis.value, s.value, s.g1, s.g2, s.merged]
            for s in boundary.samples
        ]
        name = f"phase_{axis.value.replace('-', '_')}"
        outputs.append(write_table(cfg.output_dir / name, PHASE_COLUMNS, rows, cfg.fmt))
    if cfg.phase_check_minimum and (cfg.phase_axis in ("all", Axis.DETUNING.value)):
        report = detuning_minimum_check(cfg.params, cfg.phase_eps_list)
        outputs.append(write_json(cfg.output_dir / "scaling.json", {
            "target_detuning": report.target,
            "argmin_g1": report.argmin_g1,
            "argmin_g2": report.argmin_g2,
            "grid_step": report.grid_step,
            "minimum_on_grid": report.minimum_on_grid,
            "scaling_ok": report.scaling_ok,
            "one_sided_above": report.one_sided_above,
            "sym_ratios": report.sym_ratios,
            "checks": [
                {
                    "eps": c.eps,
                    "g1_plus": c.g1_plus,
                    "g1_minus": c.g1_minus,
                    "residual_plus": c.residual_plus,
                    "residual_minus": c.residual_minus,
                    "residual_sym": c.residual_sym,
                }
                for c in report.checks
            ],
        }))
    return outputs


def run_fluct(cfg: RunConfig) -> list:
    params = cfg.params
    crit = critical_points(params)
    g_lo = cfg.fluct_g0_min if cfg.fluct_g0_min is not None else 0.2 * crit.g1
    g_hi = cfg.fluct_g0_max if cfg.fluct_g0_max is not None else 1.5 * crit.g2
    half = max(cfg.fluct_points // 2, 2)

    rows = []
    vac_grid = np.linspace(g_lo, crit.g2 * (1.0 - 1e-6), half)
    for g0 in vac_grid:
        p = replace(params, drive=float(g0))
        rows.append(fluct_row(float(g0), "vacuum", spectrum(vacuum_branch(p), p)))
    sr_grid = np.linspace(crit.g1 * (1.0 + 1e-6), g_hi, half)
    for g0 in sr_grid:
        p = replace(params, drive=float(g0))
        branch = stable_superradiant_branch(p)
        if branch is None:
            continue
        rows.append(fluct_row(float(g0), "super-radiant", spectrum(branch, p)))
    out = [write_table(cfg.output_dir / "fluct", FLUCT_COLUMNS, rows, cfg.fmt)]

    fits = []
    for side, window in ((Side.AT_G2, cfg.fluct_window_g2), (Side.AT_G1, cfg.fluct_window_g1)):
        fit = critical_exponent_fit(params, side, crit=crit, window=window,
                                    samples=cfg.fluct_samples)
        fits.append({
            "side": fit.side.value,
            "g_c": fit.g_c,
            "slope": fit.slope,
            "r2": fit.r2,
            "window": list(fit.window),
            "trusted": fit.trusted,
        })
    out.append(write_json(cfg.output_dir / "exponents.json", fits))
    return out


# ---------------------------------------------------------------------------
# validation checklist
# ---------------------------------------------------------------------------


def validate(params: Optional[SystemParams] = None) -> list:
    """Cross-module invariant checklist; returns (name, passed, detail) items."""
    if params is None:
        params = SystemParams(**{k: DEFAULT_PARAMS[k] for k in
                                 ("detuning", "loss", "splitting", "coupling")},
                              drive=1.0, size=Finite(200))
    items = []

    dev = chain.oracle_grid_max_deviation(j=params.coupling)
    items.append(("oracle-equivalence", dev <= 1e-9, f"max |free-fermion - exact-diag| = {dev:.3e}"))

    worst_trace = 0.0
    worst_pair = 0.0
    for g0 in (0.3, 0.75, 0.87, 1.1, 1.4):
        p = replace(params, drive=g0)
        points = find_fixed_points(p)
        for bp in points:
            sm_spec = spectrum(bp, p)
            worst_trace = max(worst_trace, abs(sm_spec.omega[0] + sm_spec.omega[1] + params.loss))
        positives = {round(bp.phi_s, 10): bp for bp in points if bp.phi_s > 1e-8}
        for phi, bp in positives.items():
            partner = min(points, key=lambda q: abs(q.phi_s + phi))
            worst_pair = max(worst_pair, abs(partner.phi_s + bp.phi_s),
                             abs(abs(partner.c_s) - abs(bp.c_s)),
                             0.0 if partner.stable == bp.stable else 1.0)
    items.append(("trace-identity", worst_trace <= 1e-12,
                  f"max |omega1 + omega2 + loss| = {worst_trace:.3e}"))
    items.append(("z2-pairing", worst_pair <= 1e-10,
                  f"max pair asymmetry = {worst_pair:.3e}"))

    base = replace(params, drive_phase=0.0, drive=1.1)
    ref_points = find_fixed_points(base)
    ref_crit = critical_points(base)
    worst_phase = 0.0
    for phase in (math.pi / 4.0, math.pi / 2.0):
        rotated = replace(base, drive_phase=phase)
        pts = find_fixed_points(rotated)
        crit = critical_points(rotated)
        worst_phase = max(worst_phase, abs(crit.g1 - ref_crit.g1), abs(crit.g2 - ref_crit.g2))
        for a, b in zip(ref_points, pts):
            worst_phase = max(worst_phase, abs(a.phi_s - b.phi_s), abs(a.s_x - b.s_x),
                              abs(a.c_s - b.c_s))
            expected = a.a_s * complex(math.cos(phase), math.sin(phase))
            worst_phase = max(worst_phase, abs(expected - b.a_s))
            check = (b.a_s * complex(math.cos(phase), -math.sin(phase))).real
            worst_phase = max(worst_phase, abs(check - b.phi_s))
    items.append(("drive-phase-independence", worst_phase <= 1e-10,
                  f"max deviation under drive-phase rotation = {worst_phase:.3e}"))
    return items


def run_validate(cfg: RunConfig) -> list:
    items = validate(cfg.params)
    for name, passed, detail in items:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    write_json(cfg.output_dir / "validate.json", [
        {"item": n, "passed": p, "detail": d} for n, p, d in items
    ])
    if not all(p for _, p, _ in items):
        raise _ValidationFailed()
    return [cfg.output_dir / "validate.json"]


class _ValidationFailed(Exception):
    pass


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _config_echo(cfg: RunConfig) -> dict:
    size = cfg.params.size
    return {
        "task": cfg.task,
        "threads": cfg.threads,
        "format": cfg.fmt,
        "params": {
            "detuning": cfg.params.detuning,
            "loss": cfg.params.loss,
            "splitting": cfg.params.splitting,
            "coupling": cfg.params.coupling,
            "drive": cfg.params.drive,
            "sites": size.n if isinstance(size, Finite) else "thermodynamic",
            "drive_phase": cfg.params.drive_phase,
        },
    }


def run(cfg: RunConfig) -> int:
    """Execute one task; returns the process exit code."""
    start = time.monotonic()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    runner = {
        "sweep": run_sweep,
        "branches": run_branches,
        "phase": run_phase,
        "fluct": run_fluct,
        "validate": run_validate,
    }[cfg.task]
    try:
        outputs = runner(cfg)
    except _ValidationFailed:
        print("validation failed", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure in {exc.operation}: {exc}", file=sys.stderr)
        return 3
    write_json(cfg.output_dir / "run.json", {
        "tool": f"cavity-ising {__version__}",
        "config": _config_echo(cfg),
        "wall_time_s": time.monotonic() - start,
        "outputs": sorted(p.name for p in outputs),
    })
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavity-ising",
        description="Steady states, stability, phase boundaries and "
                    "fluctuations of a driven Ising chain in a lossy cavity.",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        p.add_argument("--config", type=Path, default=None)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.task, args.out,
                          threads=args.threads, fmt=args.format)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure in {exc.operation}: {exc}", file=sys.stderr)
        return 3
    except CavityIsingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
