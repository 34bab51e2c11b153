"""Self-consistent steady states of the driven chain-cavity system.

The cavity equation of motion forces the steady photon quadrature

    phi_s = -detuning * drive * S_x / (detuning^2 + loss^2/4)

while the chain's ground state fixes S_x as a function of the x field
b_x = 2 * drive * phi_s. Zeros of

    residual(phi) = phi - photon_from_sx(S_x(2 * drive * phi))

are the steady states. A fixed point is stable iff the coefficient

    C_s = 1 + detuning * drive * dS_x/dphi / (detuning^2 + loss^2/4)

is positive; this form (with the detuning factor) is the one consistent with
the eigenvalues of the linear stability matrix and with the Jacobian of the
fixed-point map. The variant without the detuning factor is also computed and
reported for comparison, but classification always uses the consistent form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .chain import (
    ChainSize,
    Finite,
    IsingChainParams,
    SpinPhase,
    THERMODYNAMIC,
    ThermodynamicLimit,
    classify_phase,
    dsx_dbx,
    ground_state_sx,
    ground_state_sx_array,
)
from .errors import CriticalPointNotFound, ParameterError, ResolutionError

ROOT_BISECTION_TOL = 1e-10   # absolute phi tolerance for root refinement
ROOT_DEDUPE_TOL = 1e-8       # roots closer than this are one root
ROOT_ZERO_TOL = 1e-8         # |phi| below this counts as the vacuum root
DEFAULT_GRID_POINTS = 2001
MERGE_REL_TOL = 1e-6         # |g2-g1|/g2 below this flags a continuous transition


class CavityPhase(str, Enum):
    NORMAL = "normal"
    SUPER_RADIANT = "super-radiant"


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the coupled system. ``coupling`` is the unit."""

    detuning: float                 # cavity-drive mismatch
    loss: float                     # photon loss rate, >= 0
    splitting: float                # spin energy splitting, >= 0
    coupling: float = 1.0           # Ising interaction strength, > 0
    drive: float = 0.0              # drive strength g0, >= 0
    size: ChainSize = Finite(200)
    drive_phase: float = 0.0        # enters only the steady field amplitude

    def __post_init__(self):
        for name in ("detuning", "loss", "splitting", "coupling", "drive", "drive_phase"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite number, got {v!r}")
        if self.coupling <= 0:
            raise ParameterError(f"coupling must be > 0, got {self.coupling!r}")
        if self.loss < 0:
            raise ParameterError(f"loss must be >= 0, got {self.loss!r}")
        if self.splitting < 0:
            raise ParameterError(f"splitting must be >= 0, got {self.splitting!r}")
        if self.drive < 0:
            raise ParameterError(f"drive must be >= 0, got {self.drive!r}")
        if self.detuning == 0.0 and self.loss == 0.0:
            raise ParameterError("detuning and loss cannot both be zero")
        if not isinstance(self.size, (Finite, ThermodynamicLimit)):
            raise ParameterError(f"size must be Finite or ThermodynamicLimit, got {self.size!r}")

    @property
    def lorentzian(self) -> float:
        """detuning^2 + loss^2/4, the cavity response denominator."""
        return self.detuning ** 2 + self.loss ** 2 / 4.0

    def chain(self, b_x: float) -> IsingChainParams:
        return IsingChainParams(self.splitting, b_x, self.coupling, self.size)


@dataclass(frozen=True)
class BranchPoint:
    """One self-consistent solution at drive strength ``g0``."""

    g0: float
    phi_s: float
    s_x: float
    c_s: float            # stability coefficient, detuning-consistent form
    c_s_printed: float    # variant without the detuning factor
    stable: bool
    cavity_phase: CavityPhase
    spin_phase: SpinPhase
    a_s: complex          # steady field amplitude scaled by 1/sqrt(N)


@dataclass(frozen=True)
class CriticalPoints:
    g1: float
    g2: float
    merged: bool


@dataclass(frozen=True)
class SweepResult:
    g0_grid: np.ndarray
    branches: list            # list of list[BranchPoint], one inner list per g0
    forward: np.ndarray       # trace following the vacuum branch upward
    backward: np.ndarray      # trace following the super-radiant branch downward


def photon_from_sx(s_x: float, params: SystemParams) -> float:
    """Steady photon quadrature sourced by a given spin polarization."""
    return -params.detuning * params.drive * s_x / params.lorentzian


def residual(phi: float, params: SystemParams) -> float:
    """phi minus the photon field it self-consistently generates."""
    s = ground_state_sx(params.chain(2.0 * params.drive * phi))
    return phi - photon_from_sx(s, params)


def _residual_array(phi, params: SystemParams):
    s = ground_state_sx_array(params.splitting, 2.0 * params.drive * np.asarray(phi),
                              params.coupling, params.size)
    return np.asarray(phi) + params.detuning * params.drive * s / params.lorentzian


def stability_coefficient(phi_star: float, params: SystemParams) -> float:
    """C_s at a fixed point, detuning-consistent form (classification form)."""
    return _stability_pair(phi_star, params)[0]


def stability_coefficient_printed(phi_star: float, params: SystemParams) -> float:
    """C_s without the detuning factor, as an alternate convention."""
    return _stability_pair(phi_star, params)[1]


def _stability_pair(phi_star: float, params: SystemParams):
    dphi = 2.0 * params.drive * dsx_dbx(params.chain(2.0 * params.drive * phi_star))
    base = params.drive * dphi / params.lorentzian
    return 1.0 + params.detuning * base, 1.0 + base


def sx_slope_dphi(phi_star: float, params: SystemParams) -> float:
    """dS_x/dphi at a fixed point (chain rule through b_x = 2 g0 phi)."""
    return 2.0 * params.drive * dsx_dbx(params.chain(2.0 * params.drive * phi_star))


def phi_bound(params: SystemParams, g0: Optional[float] = None) -> float:
    """|phi_s| bound |detuning| g0 / (detuning^2 + loss^2/4), from |S_x| <= 1."""
    g = params.drive if g0 is None else g0
    return abs(params.detuning) * g / params.lorentzian


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------


def _bisect_root(params: SystemParams, a: float, b: float, fa: float, fb: float) -> float:
    while b - a > ROOT_BISECTION_TOL:
        mid = 0.5 * (a + b)
        fm = residual(mid, params)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def _interior_dip(params: SystemParams, lo: float, hi: float, points: int = 201):
    """Refine the interior minimum of residual(phi)/phi on [lo, hi] (phi > 0).

    Dividing by phi strips the trivial root at the origin, so the dip carved
    by the chain's near-critical response stands out. Uses function values
    only. Returns (phi_min, residual(phi_min)) or None if no interior dip.
    """
    grid = np.linspace(lo, hi, points)
    vals = _residual_array(grid, params) / grid
    i = int(np.argmin(vals))
    if i == 0 or i == points - 1:
        return None
    res = minimize_scalar(
        lambda p: residual(p, params) / p,
        bounds=(grid[i - 1], grid[i + 1]),
        method="bounded",
        options={"xatol": 1e-15},
    )
    return float(res.x), residual(float(res.x), params)


def _scan_grid(params: SystemParams, grid_points: int) -> np.ndarray:
    pmax = phi_bound(params) * (1.0 + 1e-3)
    if pmax == 0.0:
        return np.array([0.0])
    uniform = np.linspace(-pmax, pmax, grid_points)
    # geometric tail resolves the tiny super-radiant roots born just above g2
    tail = pmax * 10.0 ** (-np.arange(3.0, 13.0))
    return np.unique(np.concatenate([uniform, tail, -tail, [0.0]]))


def find_fixed_points(params: SystemParams, *, grid_points: int = DEFAULT_GRID_POINTS,
                      dedupe_tol: float = ROOT_DEDUPE_TOL) -> list[BranchPoint]:
    """All steady states at ``params.drive``, each with stability attached.

    Dense scan over [-phi_max, phi_max] brackets sign changes of the
    residual, each refined by bisection; a fold whose root pair falls between
    grid nodes is recovered from the sign of the interior minimum of
    residual/phi (function values only, no derivatives). The vacuum root
    phi = 0 is always present. Roots are reported in +/- pairs ordered by
    |phi| with the non-negative representative first.
    """
    if grid_points < 3:
        raise ParameterError(f"grid_points must be >= 3, got {grid_points}")
    grid = _scan_grid(params, grid_points)
    vals = _residual_array(grid, params)

    roots = [0.0]
    for i in range(len(grid) - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        fa, fb = float(vals[i]), float(vals[i + 1])
        if fa == 0.0:
            root = a
        elif fa * fb < 0.0:
            root = _bisect_root(params, a, b, fa, fb)
        else:
            continue
        if all(abs(root - r) > dedupe_tol for r in roots):
            roots.append(root)
    if vals[-1] == 0.0 and all(abs(float(grid[-1]) - r) > dedupe_tol for r in roots):
        roots.append(float(grid[-1]))

    if not any(r > ROOT_ZERO_TOL for r in roots):
        # the scan saw no super-radiant pair; check for a dip the grid missed
        pmax = phi_bound(params) * (1.0 + 1e-3)
        if pmax > 0.0:
            dip = _interior_dip(params, 1e-9 * pmax, pmax)
            if dip is not None and dip[1] < 0.0:
                phi_m, f_m = dip
                lo_edge = 1e-12 * pmax
                f_lo = residual(lo_edge, params)
                f_hi = residual(pmax, params)
                new = []
                if f_lo > 0.0 > f_m:
                    new.append(_bisect_root(params, lo_edge, phi_m, f_lo, f_m))
                if f_m < 0.0 < f_hi:
                    new.append(_bisect_root(params, phi_m, pmax, f_m, f_hi))
                survivors = []
                for r in new:
                    if all(abs(r - q) > dedupe_tol for q in roots + survivors):
                        survivors.append(r)
                # the dip proves how many distinct roots exist on phi > 0
                expected = 2 if f_lo > 0.0 else 1
                if len(survivors) < expected:
                    raise ResolutionError(
                        f"{expected} distinct roots exist near phi={phi_m!r} at "
                        f"drive {params.drive!r} but could not be separated at "
                        f"dedupe tolerance {dedupe_tol!r}; use a denser grid"
                    )
                for r in survivors:
                    roots.extend((r, -r))

    if stability_coefficient(0.0, params) < 0.0 and not any(r > ROOT_ZERO_TOL for r in roots):
        raise ResolutionError(
            f"vacuum is unstable at drive {params.drive!r} but the "
            f"{grid_points}-point scan found no nonzero root; use a denser grid"
        )

    roots.sort(key=lambda r: (abs(r), -r))
    return [_branch_point(r, params) for r in roots]


def _branch_point(phi: float, params: SystemParams) -> BranchPoint:
    g0 = params.drive
    s_x = ground_state_sx(params.chain(2.0 * g0 * phi))
    c_s, c_s_printed = _stability_pair(phi, params)
    b_perp = math.hypot(params.splitting, 2.0 * g0 * phi)
    point = BranchPoint(
        g0=g0,
        phi_s=phi,
        s_x=s_x,
        c_s=c_s,
        c_s_printed=c_s_printed,
        stable=c_s > 0.0,
        cavity_phase=CavityPhase.SUPER_RADIANT if abs(phi) > ROOT_ZERO_TOL else CavityPhase.NORMAL,
        spin_phase=classify_phase(b_perp, params.coupling),
        a_s=0j,
    )
    return replace(point, a_s=steady_field_amplitude(point, params))


def steady_field_amplitude(branch: BranchPoint, params: SystemParams) -> complex:
    """Steady cavity amplitude a_s / sqrt(N) from the field equation of motion.

    The quadrature identity Re(a_s e^{-i phase}) / sqrt(N) = phi_s holds for
    every drive phase; only a_s carries the phase.
    """
    denom = 1j * params.detuning + params.loss / 2.0
    if denom == 0:
        raise ParameterError("detuning and loss cannot both be zero")
    phase = complex(math.cos(params.drive_phase), math.sin(params.drive_phase))
    return -1j * branch.g0 * branch.s_x * phase / denom


def vacuum_branch(params: SystemParams) -> BranchPoint:
    """The phi = 0 branch point at ``params.drive`` (always a fixed point)."""
    return _branch_point(0.0, params)


def stable_superradiant_branch(params: SystemParams) -> Optional[BranchPoint]:
    """The outermost stable phi > 0 branch point, or None when absent."""
    best = None
    for p in find_fixed_points(params):
        if p.stable and p.phi_s > ROOT_ZERO_TOL:
            if best is None or p.phi_s > best.phi_s:
                best = p
    return best


# ---------------------------------------------------------------------------
# critical drive strengths
# ---------------------------------------------------------------------------


def vacuum_marginality_g2(params: SystemParams) -> float:
    """Closed form for g2: the drive where the vacuum branch turns marginal.

    C_s(0) = 1 + 2 detuning g0^2 dS_x/db_x|_0 / lorentzian = 0 solves to
    g2 = sqrt(lorentzian / (-2 detuning dS_x/db_x|_0)).
    """
    d0 = dsx_dbx(params.chain(0.0))
    if params.detuning <= 0.0 or d0 >= 0.0:
        raise CriticalPointNotFound(
            f"vacuum never destabilizes (detuning={params.detuning!r}, "
            f"dS_x/db_x|_0={d0!r})"
        )
    return math.sqrt(params.lorentzian / (-2.0 * params.detuning * d0))


def _vacuum_cs(params: SystemParams, g0: float, d0: float) -> float:
    return 1.0 + 2.0 * params.detuning * g0 * g0 * d0 / params.lorentzian


def _has_superradiant_root(params: SystemParams, g0: float,
                           grid_points: int = DEFAULT_GRID_POINTS) -> bool:
    """Does any nonzero fixed point exist at drive g0? Function values only."""
    p = replace(params, drive=g0)
    pmax = phi_bound(p)
    if pmax == 0.0:
        return False
    pmax *= 1.0 + 1e-3
    # geometric tail: roots born at the vacuum instability start arbitrarily small
    tail = pmax * 10.0 ** (-np.arange(3.0, 13.0))
    grid = np.unique(np.concatenate([np.linspace(pmax / grid_points, pmax, grid_points), tail]))
    vals = _residual_array(grid, p)
    if np.any(vals <= 0.0):
        return True
    dip = _interior_dip(p, float(grid[0]), pmax)
    return dip is not None and dip[1] < 0.0


def critical_points(params: SystemParams, *, rel_tol: float = 1e-8) -> CriticalPoints:
    """Lower and upper critical drives (g1, g2), g1 <= g2.

    g2 is found by bisection on the sign of the vacuum stability coefficient
    (cross-checked by the marginality closed form); g1 by bisection on the
    count of nonzero roots, which changes at the fold where the stable and
    unstable super-radiant branches meet. ``merged`` flags g1 = g2 within
    MERGE_REL_TOL (continuous transition).
    """
    d0 = dsx_dbx(params.chain(0.0))
    if params.detuning <= 0.0 or d0 >= 0.0:
        raise CriticalPointNotFound(
            f"no super-radiant transition for detuning={params.detuning!r}"
        )
    # vacuum marginality: C_s(0; g0) decreases monotonically in g0
    hi = params.coupling
    for _ in range(200):
        if _vacuum_cs(params, hi, d0) < 0.0:
            break
        hi *= 2.0
    else:
        raise CriticalPointNotFound("vacuum stays stable up to the search bound")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _vacuum_cs(params, mid, d0) < 0.0:
            hi = mid
        else:
            lo = mid
    g2 = 0.5 * (lo + hi)

    # fold: lowest drive with a nonzero root pair
    hi = g2 * (1.0 + 1e-4)
    if not _has_superradiant_root(params, hi):
        raise CriticalPointNotFound(
            f"no super-radiant branch found just above g2={g2!r}"
        )
    lo = 0.05 * g2
    for _ in range(60):
        if not _has_superradiant_root(params, lo):
            break
        lo *= 0.5
    else:
        raise CriticalPointNotFound("super-radiant branch persists to zero drive")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _has_superradiant_root(params, mid):
            hi = mid
        else:
            lo = mid
    g1 = min(0.5 * (lo + hi), g2)
    return CriticalPoints(g1=g1, g2=g2, merged=(g2 - g1) / g2 < MERGE_REL_TOL)


# ---------------------------------------------------------------------------
# hysteresis sweep
# ---------------------------------------------------------------------------


def _max_stable_positive(points: Sequence[BranchPoint]) -> float:
    best = 0.0
    for p in points:
        if p.stable and p.phi_s > ROOT_ZERO_TOL:
            best = max(best, p.phi_s)
    return best


def sweep_hysteresis(params: SystemParams, g0_grid: Sequence[float], *,
                     threads: int = 1) -> SweepResult:
    """All branches on a drive grid plus explicit forward/backward traces.

    The forward trace follows the vacuum branch until it destabilizes (at g2)
    and then jumps to the super-radiant branch; the backward trace follows
    the super-radiant branch down until it folds (at g1) and then drops to
    the vacuum. Results are independent of evaluation order.
    """
    g0_grid = np.asarray(list(g0_grid), dtype=float)
    if g0_grid.ndim != 1 or len(g0_grid) == 0 or np.any(np.diff(g0_grid) <= 0.0):
        raise ParameterError("g0_grid must be a non-empty strictly increasing sequence")

    def solve(g0: float) -> list[BranchPoint]:
        return find_fixed_points(replace(params, drive=float(g0)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            branches = list(pool.map(solve, g0_grid))
    else:
        branches = [solve(g) for g in g0_grid]

    forward = np.empty(len(g0_grid))
    backward = np.empty(len(g0_grid))
    for i, points in enumerate(branches):
        vacuum_stable = any(
            abs(p.phi_s) <= ROOT_ZERO_TOL and p.stable for p in points
        )
        sr = _max_stable_positive(points)
        forward[i] = 0.0 if vacuum_stable else sr
        backward[i] = sr
    return SweepResult(g0_grid=g0_grid, branches=branches,
                       forward=forward, backward=backward)
