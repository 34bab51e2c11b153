"""Linearized fluctuations of the cavity field around a steady state.

Writing the field fluctuation vector V = (da, da+)^T and adiabatically
slaving the chain polarization (dS_x = dS_x/dphi * dphi), the linearized
equations of motion are dV/dt = M V + noise with the non-normal matrix

    M = [[-i(detuning + s) - loss/2,  -i s],
         [ i s,                        i(detuning + s) - loss/2]]

where s = drive * dS_x/dphi / 2 is the feedback slope. Its eigenvalues are

    omega = (-loss -/+ i sqrt(4 detuning^2 + 8 detuning s)) / 2,

summing to -loss. The steady occupation of the fluctuation field follows
from the biorthogonal eigensystem L R = I of M and the input-noise
correlator <xi(t) xi+(t')> = loss * delta(t - t'):

    <da+ da> = - sum_ij loss / (omega_i + omega_j) L_i1 L_j2 R_2i R_1j,

which diverges as a power law at the critical drives. An independent check
solves the steady Lyapunov equation M S + S M+ = -loss e1 e1^T directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateEigenvalueError, FitWindowError
from .steady import (
    BranchPoint,
    CriticalPoints,
    SystemParams,
    critical_points,
    stable_superradiant_branch,
    sx_slope_dphi,
    vacuum_branch,
)

EIGENVALUE_DEGENERACY_TOL = 1e-10
DIVERGENCE_TOL = 1e-12      # |omega_i + omega_j| below this is critical
IMAG_PART_TOL = 1e-10       # n_fluct must be real to this level

# per-side default fit windows for |g0 - g_c| / g_c; see critical_exponent_fit
DEFAULT_WINDOW_AT_G2 = (1e-4, 1e-2)
DEFAULT_WINDOW_AT_G1 = (1e-3, 3e-2)
DEFAULT_FIT_SAMPLES = 24
TRUSTED_R2 = 0.99


class Side(str, Enum):
    AT_G1 = "g1"
    AT_G2 = "g2"


@dataclass(frozen=True)
class StabilityMatrix:
    m: np.ndarray      # 2x2 complex
    slope: float       # drive * dS_x/dphi / 2


@dataclass(frozen=True)
class FluctuationSpectrum:
    omega: tuple         # (omega_1, omega_2), complex
    left: np.ndarray     # rows are left eigenvectors
    right: np.ndarray    # columns are right eigenvectors
    n_fluct: float       # math.inf on a critical / unstable point
    divergent: bool


@dataclass(frozen=True)
class ExponentFit:
    side: Side
    g_c: float
    slope: float
    r2: float
    window: tuple
    trusted: bool


def stability_matrix(branch: BranchPoint, params: SystemParams) -> StabilityMatrix:
    """Linear stability matrix of the mean-field solution at ``branch``."""
    g0 = branch.g0
    p = params if params.drive == g0 else replace(params, drive=g0)
    slope = g0 * sx_slope_dphi(branch.phi_s, p) / 2.0
    return _matrix_from_slope(slope, params.detuning, params.loss)


def _matrix_from_slope(slope: float, detuning: float, loss: float) -> StabilityMatrix:
    a = detuning + slope
    m = np.array(
        [[-1j * a - loss / 2.0, -1j * slope],
         [1j * slope, 1j * a - loss / 2.0]],
        dtype=complex,
    )
    return StabilityMatrix(m=m, slope=slope)


def eigenvalues_closed_form(sm: StabilityMatrix, params: SystemParams):
    """Both eigenvalues of M, principal branch of the complex square root."""
    d = params.detuning
    root = np.sqrt(complex(4.0 * d * d + 8.0 * d * sm.slope))
    return (
        complex(-params.loss - 1j * root) / 2.0,
        complex(-params.loss + 1j * root) / 2.0,
    )


def eigenvalues_generic(sm: StabilityMatrix):
    """Characteristic-polynomial eigensolve of the 2x2 matrix (oracle)."""
    m = sm.m
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(tr * tr - 4.0 * det)
    return (tr - disc) / 2.0, (tr + disc) / 2.0


def biorthogonal_eigvecs(sm: StabilityMatrix):
    """(L, R): unit-norm right eigenvector columns, left rows with L R = I."""
    omega, R = np.linalg.eig(sm.m)
    # a defective double eigenvalue splits numerically by ~sqrt(eps)*|M|,
    # so the degeneracy guard must scale with the matrix norm
    tol = max(EIGENVALUE_DEGENERACY_TOL, 1e-7 * float(np.linalg.norm(sm.m)))
    if abs(omega[0] - omega[1]) <= tol:
        raise DegenerateEigenvalueError(
            f"eigenvalues {omega[0]!r}, {omega[1]!r} too close for a "
            "biorthogonal basis"
        )
    R = R / np.linalg.norm(R, axis=0, keepdims=True)
    L = np.linalg.inv(R)
    return L, R


def fluct_photon_number(left: np.ndarray, right: np.ndarray, omega, loss: float) -> float:
    """<da+ da> from the biorthogonal double sum; math.inf when divergent.

    Requires Re(omega) < 0 for both eigenvalues (a stable branch); a critical
    point where omega_i + omega_j vanishes is likewise reported as divergent.
    """
    if max(omega[0].real, omega[1].real) >= 0.0:
        return math.inf
    total = 0j
    for i in range(2):
        for j in range(2):
            denom = omega[i] + omega[j]
            if abs(denom) < DIVERGENCE_TOL:
                return math.inf
            total += -loss / denom * left[i, 0] * left[j, 1] * right[1, i] * right[0, j]
    if abs(total.imag) > IMAG_PART_TOL:
        raise FloatingPointError(
            f"fluctuation number has imaginary part {total.imag!r}"
        )
    return float(max(total.real, 0.0))


def lyapunov_photon_number(sm: StabilityMatrix, loss: float) -> float:
    """Independent oracle: <da+ da> from the steady covariance.

    Solves M S + S M+ = -loss e1 e1^T for S = <V V+> and reads the (2, 2)
    entry. math.inf when M is not strictly stable.
    """
    omega = np.linalg.eigvals(sm.m)
    if omega.real.max() >= 0.0:
        return math.inf
    d = np.zeros((2, 2), dtype=complex)
    d[0, 0] = loss
    eye = np.eye(2)
    k = np.kron(sm.m, eye) + np.kron(eye, sm.m.conj())
    s = np.linalg.solve(k, -d.reshape(-1)).reshape(2, 2)
    return float(s[1, 1].real)


def spectrum(branch: BranchPoint, params: SystemParams) -> FluctuationSpectrum:
    """Full fluctuation data at a branch point."""
    sm = stability_matrix(branch, params)
    omega = eigenvalues_closed_form(sm, params)
    left, right = biorthogonal_eigvecs(sm)
    # align the eigenvector order with the closed-form eigenvalue order
    numeric = np.linalg.eigvals(sm.m)
    perm = (0, 1) if (abs(numeric[0] - omega[0]) + abs(numeric[1] - omega[1])
                      <= abs(numeric[0] - omega[1]) + abs(numeric[1] - omega[0])) else (1, 0)
    left = left[perm, :]
    right = right[:, perm]
    n = fluct_photon_number(left, right, omega, params.loss)
    return FluctuationSpectrum(
        omega=omega, left=left, right=right,
        n_fluct=n, divergent=math.isinf(n),
    )


# ---------------------------------------------------------------------------
# critical-exponent extraction
# ---------------------------------------------------------------------------


def fit_power_law(offsets: Sequence[float], values: Sequence[float]):
    """Least-squares slope and R^2 of log(values) against log(offsets)."""
    lx = np.log(np.asarray(offsets, dtype=float))
    ly = np.log(np.asarray(values, dtype=float))
    design = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(coef[0]), r2


def critical_exponent_fit(params: SystemParams, side: Side, *,
                          crit: Optional[CriticalPoints] = None,
                          window: Optional[tuple] = None,
                          samples: int = DEFAULT_FIT_SAMPLES) -> ExponentFit:
    """Power-law exponent of the fluctuation number approaching g1 or g2.

    Samples log-spaced relative offsets on the approach side (vacuum branch
    from below g2, super-radiant branch from above g1), fits
    log n_fluct ~ slope * log|g0 - g_c|, and marks the fit trusted when
    R^2 exceeds 0.99. The fold at g1 has an asymptotic exponent of -1/2
    that crosses over to steeper effective slopes away from it, so the g1
    window defaults to the crossover region; both windows are overridable.
    """
    if crit is None:
        crit = critical_points(params)
    if window is None:
        window = DEFAULT_WINDOW_AT_G2 if side == Side.AT_G2 else DEFAULT_WINDOW_AT_G1
    lo, hi = window
    if not (0.0 < lo < hi):
        raise FitWindowError(f"invalid fit window {window!r}")
    rel = np.geomspace(lo, hi, samples)
    g_c = crit.g2 if side == Side.AT_G2 else crit.g1

    offsets, values = [], []
    for r in rel:
        if side == Side.AT_G2:
            g0 = g_c * (1.0 - r)
            branch = vacuum_branch(replace(params, drive=g0))
        else:
            g0 = g_c * (1.0 + r)
            branch = stable_superradiant_branch(replace(params, drive=g0))
            if branch is None:
                continue
        n = spectrum(branch, params).n_fluct
        if math.isfinite(n) and n > 0.0:
            offsets.append(abs(g0 - g_c))
            values.append(n)
    if len(values) < 10:
        raise FitWindowError(
            f"only {len(values)} valid samples in window {window!r} at side {side.value}"
        )
    slope, r2 = fit_power_law(offsets, values)
    return ExponentFit(side=side, g_c=g_c, slope=slope, r2=r2,
                       window=(float(lo), float(hi)), trusted=r2 >= TRUSTED_R2)
