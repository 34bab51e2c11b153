"""Figure builders: publication-style panels from solver artifacts.

Strictly a re-plot of the CSV/JSON data — no physics is recomputed here.
Stable branches are drawn solid, unstable branches dashed (configurable).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import (
    BRANCH_COLUMNS,
    FLUCT_COLUMNS,
    PHASE_COLUMNS,
    SchemaError,
    read_exponents,
    read_rows,
)

VACUUM_TOL = 1e-8

PHASE_FILES = {
    "detuning": "phase_detuning.csv",
    "loss": "phase_loss.csv",
    "splitting ratio": "phase_splitting_ratio.csv",
}


@dataclass(frozen=True)
class Style:
    stable_linestyle: str = "solid"
    unstable_linestyle: str = "dashed"
    dpi: int = 150


@dataclass(frozen=True)
class FigureSpec:
    figure: str          # fig2 | fig3 | fig4
    input_dir: Path
    output: Path
    style: Style = Style()


def _branch_curves(rows):
    """Split branch-table rows into drawable curves.

    Curves are keyed by (sign class, stability) so the stable and unstable
    super-radiant arcs at the same drive never get joined.
    """
    groups = {}
    for row in rows:
        phi = row["phi_s"]
        cls = "vacuum" if abs(phi) <= VACUUM_TOL else ("positive" if phi > 0 else "negative")
        groups.setdefault((cls, row["stable"]), []).append(row)
    for key in groups:
        groups[key].sort(key=lambda r: r["g0"])
    return groups


def build_fig2(input_dir: Path, style: Style):
    """Photon quadrature, spin polarization and stability coefficient vs drive."""
    rows = read_rows(input_dir / "sweep.csv", BRANCH_COLUMNS)
    if not any(abs(r["phi_s"]) > VACUUM_TOL and r["stable"] for r in rows):
        warnings.warn(
            "sweep.csv has no stable super-radiant rows; rendering the "
            "vacuum branch only",
            stacklevel=2,
        )
    curves = _branch_curves(rows)
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 8.0), sharex=True)
    panels = [("phi_s", r"$\phi_s$"), ("s_x", r"$S_x$"), ("c_s_mconsistent", r"$C_s$")]
    for ax, (column, label) in zip(axes, panels):
        for (cls, stable), pts in sorted(curves.items()):
            ls = style.stable_linestyle if stable else style.unstable_linestyle
            color = {"vacuum": "tab:blue", "positive": "tab:red", "negative": "tab:orange"}[cls]
            ax.plot([p["g0"] for p in pts], [p[column] for p in pts],
                    linestyle=ls, color=color, linewidth=1.4)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[-1].axhline(0.0, color="gray", linewidth=0.6)
    axes[-1].set_xlabel(r"drive strength $g_0$")
    axes[0].set_title("steady-state branches (solid = stable, dashed = unstable)")
    fig.tight_layout()
    return fig


def build_fig3(input_dir: Path, style: Style):
    """Critical drives g1, g2 against each available parameter axis."""
    available = {label: input_dir / name for label, name in PHASE_FILES.items()
                 if (input_dir / name).exists()}
    if not available:
        raise SchemaError(
            f"no phase boundary CSVs found in {input_dir} "
            f"(expected any of {sorted(PHASE_FILES.values())})"
        )
    fig, axes = plt.subplots(1, len(available), figsize=(4.0 * len(available), 3.6))
    if len(available) == 1:
        axes = [axes]
    for ax, (label, path) in zip(axes, sorted(available.items())):
        rows = read_rows(path, PHASE_COLUMNS)
        for column, color in (("g1", "tab:blue"), ("g2", "tab:red")):
            xs = [r["value"] for r in rows if r[column] is not None]
            ys = [r[column] for r in rows if r[column] is not None]
            ax.plot(xs, ys, linestyle=style.stable_linestyle, color=color,
                    linewidth=1.4, label=rf"$g_{column[1]}$")
        merged = [r["value"] for r in rows if r["merged"]]
        if merged:
            ax.axvline(min(merged), color="gray", linewidth=0.8, linestyle="dotted")
        ax.set_xlabel(label)
        ax.set_ylabel("critical drive")
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    return fig


def build_fig4(input_dir: Path, style: Style):
    """Eigenvalues, fluctuation occupation, and log-log exponent panels."""
    rows = read_rows(input_dir / "fluct.csv", FLUCT_COLUMNS)
    fits = read_exponents(input_dir / "exponents.json")
    by_side = {fit["side"]: fit for fit in fits}
    if not {"g1", "g2"} <= set(by_side):
        raise SchemaError("exponents.json must contain fits for sides 'g1' and 'g2'")
    branches = {
        "super-radiant": [r for r in rows if r["branch"] == "super-radiant"],
        "vacuum": [r for r in rows if r["branch"] == "vacuum"],
    }

    fig, axes = plt.subplots(2, 3, figsize=(12.0, 6.6))
    for ax, (name, pts) in zip(axes[0, :2], branches.items()):
        g0 = [p["g0"] for p in pts]
        for idx, color in (("1", "tab:blue"), ("2", "tab:red")):
            ax.plot(g0, [p[f"re_omega{idx}"] for p in pts], color=color,
                    linestyle=style.stable_linestyle, linewidth=1.2,
                    label=rf"Re $\omega_{{m{idx}}}$")
            ax.plot(g0, [p[f"im_omega{idx}"] for p in pts], color=color,
                    linestyle=style.unstable_linestyle, linewidth=1.2,
                    label=rf"Im $\omega_{{m{idx}}}$")
        ax.set_title(f"{name} branch")
        ax.set_xlabel(r"$g_0$")
        ax.set_ylabel(r"$\omega_m$")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)

    ax = axes[0, 2]
    for name, pts, color in (("super-radiant", branches["super-radiant"], "tab:red"),
                             ("vacuum", branches["vacuum"], "tab:blue")):
        finite = [p for p in pts if not p["divergent"] and p["n_fluct"] is not None]
        ax.plot([p["g0"] for p in finite], [p["n_fluct"] for p in finite],
                color=color, linestyle=style.stable_linestyle, linewidth=1.2, label=name)
    ax.set_yscale("log")
    ax.set_xlabel(r"$g_0$")
    ax.set_ylabel(r"$\langle \delta a^\dagger \delta a \rangle$")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)

    loglog_specs = (
        ("g1", "super-radiant", lambda g0, gc: g0 - gc, axes[1, 0]),
        ("g2", "vacuum", lambda g0, gc: gc - g0, axes[1, 1]),
    )
    for side, branch_name, offset_of, ax in loglog_specs:
        fit = by_side[side]
        g_c, slope = fit["g_c"], fit["slope"]
        lo, hi = fit["window"]
        pts = [p for p in branches[branch_name]
               if not p["divergent"] and p["n_fluct"] is not None]
        offs = np.array([offset_of(p["g0"], g_c) for p in pts])
        ns = np.array([p["n_fluct"] for p in pts])
        keep = offs > 0
        offs, ns = offs[keep], ns[keep]
        ax.loglog(offs, ns, ".", color="tab:blue", markersize=4)
        inside = (offs >= lo * g_c) & (offs <= hi * g_c)
        if np.any(inside):
            anchor_x = np.exp(np.mean(np.log(offs[inside])))
            anchor_y = np.exp(np.mean(np.log(ns[inside])))
            line_x = np.geomspace(lo * g_c, hi * g_c, 50)
            ax.loglog(line_x, anchor_y * (line_x / anchor_x) ** slope,
                      color="tab:red", linewidth=1.2)
        ax.set_title(f"approach to {side}")
        ax.text(0.05, 0.08, f"slope = {slope:.3f}", transform=ax.transAxes)
        ax.set_xlabel(rf"$|g_0 - g_{side[1]}|$")
        ax.set_ylabel(r"$\langle \delta a^\dagger \delta a \rangle$")
        ax.grid(alpha=0.3, which="both")

    axes[1, 2].axis("off")
    fig.tight_layout()
    return fig


_BUILDERS = {"fig2": build_fig2, "fig3": build_fig3, "fig4": build_fig4}


def render(spec: FigureSpec) -> Path:
    """Render one figure spec to its output image; returns the output path."""
    try:
        builder = _BUILDERS[spec.figure]
    except KeyError:
        raise SchemaError(f"unknown figure {spec.figure!r}, expected one of {sorted(_BUILDERS)}")
    fig = builder(spec.input_dir, spec.style)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=spec.style.dpi,
                metadata={"Software": "cavity-ising-plots"})
    plt.close(fig)
    return spec.output
