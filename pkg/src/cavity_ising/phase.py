"""Critical drive strengths traced across parameter axes.

Covers the boundary curves g1(axis), g2(axis) for the detuning, the loss
rate, and the splitting-to-coupling ratio, and the verification that both
critical drives are minimal at detuning = loss/2. Near that minimum the
self-consistency problem at detuning = loss/2 +/- eps maps onto the
detuning = loss/2 problem under the drive rescaling
g -> g sqrt(1 - 2 eps^2 / loss^2), so the rescaled critical drives collapse
onto their minimum value up to small odd-order corrections; averaging the
+eps and -eps sides cancels the cubic term and leaves an O(eps^4) residual,
which is checked by halving eps and watching the residual drop ~16x.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .errors import CriticalPointNotFound, ParameterError
from .steady import CriticalPoints, SystemParams, critical_points


class Axis(str, Enum):
    DETUNING = "detuning"
    LOSS = "loss"
    SPLITTING_RATIO = "splitting-ratio"


@dataclass(frozen=True)
class BoundarySample:
    value: float
    g1: Optional[float]
    g2: Optional[float]
    merged: Optional[bool]


@dataclass(frozen=True)
class PhaseBoundary:
    axis: Axis
    samples: list


@dataclass(frozen=True)
class ScalingCheck:
    eps: float
    g1_plus: float         # g1 at detuning = loss/2 + eps
    g1_minus: float        # g1 at detuning = loss/2 - eps
    residual_plus: float   # one-sided rescaled residual, relative
    residual_minus: float
    residual_sym: float    # residual of the +/- averaged rescale, relative


@dataclass(frozen=True)
class DetuningMinimumReport:
    grid: list             # (detuning, g1, g2) triples
    argmin_g1: float
    argmin_g2: float
    target: float          # loss / 2
    grid_step: float
    checks: list           # ScalingCheck per eps, ascending
    sym_ratios: list       # residual_sym ratios between consecutive eps
    minimum_on_grid: bool
    scaling_ok: bool
    one_sided_above: bool  # g1(loss/2 +/- eps) > g1(loss/2) for all eps


def _apply_axis(base: SystemParams, axis: Axis, value: float) -> SystemParams:
    if axis == Axis.DETUNING:
        if value <= 0.0:
            raise ParameterError("detuning axis requires values > 0")
        return replace(base, detuning=float(value))
    if axis == Axis.LOSS:
        return replace(base, loss=float(value))
    return replace(base, splitting=float(value) * base.coupling)


def boundary_vs_parameter(base: SystemParams, axis: Axis, grid: Sequence[float], *,
                          threads: int = 1) -> PhaseBoundary:
    """g1, g2 and the merge flag at each grid value of the chosen axis.

    Points where no super-radiant branch exists become gap samples (None
    entries) rather than failures.
    """
    values = [float(v) for v in grid]

    def solve(value: float) -> BoundarySample:
        try:
            cp = critical_points(_apply_axis(base, axis, value))
        except CriticalPointNotFound:
            return BoundarySample(value=value, g1=None, g2=None, merged=None)
        return BoundarySample(value=value, g1=cp.g1, g2=cp.g2, merged=cp.merged)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(solve, values))
    else:
        samples = [solve(v) for v in values]
    return PhaseBoundary(axis=axis, samples=samples)


def detuning_minimum_check(base: SystemParams, eps_list: Sequence[float], *,
                           grid_points: int = 40,
                           detuning_range: tuple = (0.05, 2.0),
                           rel_tol: float = 1e-12) -> DetuningMinimumReport:
    """Verify that g1 and g2 are minimal at detuning = loss/2, with scaling.

    (i) locates the argmin of g1 and g2 over a detuning grid;
    (ii) at detuning = loss/2 +/- eps checks the rescaling identity: the
    symmetrized residual |mean(g1+, g1-) sqrt(1 - 2 eps^2/loss^2) - g1*| / g1*
    must shrink ~16x per eps halving (one-sided residuals carry an O(eps^3)
    term and shrink ~8x; both are reported).
    """
    eps_list = sorted(float(e) for e in eps_list)
    loss = base.loss
    if loss <= 0.0:
        raise ParameterError("detuning_minimum_check requires loss > 0")
    if any(e <= 0.0 or e >= loss / 2.0 for e in eps_list):
        raise ParameterError("every eps must satisfy 0 < eps << loss")

    lo, hi = detuning_range
    step = (hi - lo) / (grid_points - 1)
    grid = []
    for i in range(grid_points):
        d = lo + i * step
        cp = critical_points(replace(base, detuning=d))
        grid.append((d, cp.g1, cp.g2))
    argmin_g1 = min(grid, key=lambda t: t[1])[0]
    argmin_g2 = min(grid, key=lambda t: t[2])[0]
    target = loss / 2.0
    minimum_on_grid = (abs(argmin_g1 - target) <= step * (1.0 + 1e-9)
                       and abs(argmin_g2 - target) <= step * (1.0 + 1e-9))

    g1_star = critical_points(replace(base, detuning=target), rel_tol=rel_tol).g1
    checks = []
    for eps in eps_list:
        gp = critical_points(replace(base, detuning=target + eps), rel_tol=rel_tol).g1
        gm = critical_points(replace(base, detuning=target - eps), rel_tol=rel_tol).g1
        factor = math.sqrt(1.0 - 2.0 * eps * eps / (loss * loss))
        checks.append(ScalingCheck(
            eps=eps,
            g1_plus=gp,
            g1_minus=gm,
            residual_plus=abs(gp * factor - g1_star) / g1_star,
            residual_minus=abs(gm * factor - g1_star) / g1_star,
            residual_sym=abs(0.5 * (gp + gm) * factor - g1_star) / g1_star,
        ))

    sym_ratios = []
    for small, big in zip(checks, checks[1:]):
        ratio_eps = big.eps / small.eps
        if abs(ratio_eps - 2.0) < 1e-9:
            sym_ratios.append(big.residual_sym / small.residual_sym)
    # each eps-halving should cut the symmetric residual ~16x (+/- 30%)
    scaling_ok = bool(sym_ratios) and all(16.0 * 0.7 <= r <= 16.0 * 1.3 for r in sym_ratios)
    one_sided_above = all(c.g1_plus > g1_star and c.g1_minus > g1_star for c in checks)

    return DetuningMinimumReport(
        grid=grid,
        argmin_g1=argmin_g1,
        argmin_g2=argmin_g2,
        target=target,
        grid_step=step,
        checks=checks,
        sym_ratios=sym_ratios,
        minimum_on_grid=minimum_on_grid,
        scaling_ok=scaling_ok,
        one_sided_above=one_sided_above,
    )
