"""Exact ground-state observables of a transverse-field Ising chain.

The chain Hamiltonian is

    H = -delta * sum_i sz_i + b_x * sum_i sx_i - j * sum_i sy_i sy_{i+1}

with periodic boundaries. Rotating every spin about the y axis aligns the
combined (delta, b_x) field with a single axis of magnitude
B = sqrt(delta^2 + b_x^2) while leaving the y-y coupling untouched, which
reduces the problem to the standard transverse-field Ising chain. That chain
is free-fermion solvable, and the magnetization along the field axis is

    m(B, j) = (1/N) sum_k (B - j cos k) / sqrt(B^2 + j^2 - 2 B j cos k)

over the antiperiodic momenta k = (2n+1) pi / N that host the even-parity
ground state; the thermodynamic limit replaces the sum by an integral with a
closed form in complete elliptic integrals. Projecting the field-axis
magnetization back onto the lab x axis gives S_x with sign(S_x) = -sign(b_x):
the ground state anti-aligns with the +b_x energy term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh
from scipy.special import ellipe, ellipkm1

from .errors import DerivativeError, ParameterError, QuadratureError

MAX_EXACT_DIAG_SITES = 14
_DENSE_DIAG_MAX_SITES = 8  # above this, Lanczos on the sparse Hamiltonian

# relative half-width of the band around B = j labelled Critical
CRITICAL_BAND = 1e-9


@dataclass(frozen=True)
class Finite:
    """A chain of n sites, n even and >= 2, periodic boundaries."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2 or self.n % 2:
            raise ParameterError(
                f"finite chain size must be an even integer >= 2, got {self.n!r}"
            )


@dataclass(frozen=True)
class ThermodynamicLimit:
    """Marker for the infinite chain."""


ChainSize = Union[Finite, ThermodynamicLimit]
THERMODYNAMIC = ThermodynamicLimit()


class SpinPhase(str, Enum):
    FERROMAGNETIC = "ferromagnetic"
    PARAMAGNETIC = "paramagnetic"
    CRITICAL = "critical"


@dataclass(frozen=True)
class IsingChainParams:
    """Spin-sector parameters: z field, x field, coupling, chain size.

    All fields are in the same energy units. ``delta`` may be given negative;
    the z-reflection symmetry maps it to ``|delta|`` before solving. ``j = 0``
    (decoupled spins) is allowed.
    """

    delta: float
    b_x: float
    j: float
    size: ChainSize = THERMODYNAMIC

    def __post_init__(self):
        for name in ("delta", "b_x", "j"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
        if self.j < 0:
            raise ParameterError(f"coupling j must be >= 0, got {self.j!r}")
        if not isinstance(self.size, (Finite, ThermodynamicLimit)):
            raise ParameterError(f"size must be Finite or ThermodynamicLimit, got {self.size!r}")


@dataclass(frozen=True)
class IsingObservables:
    s_x: float
    b_perp: float
    phase: SpinPhase


def transverse_field_magnitude(params: IsingChainParams) -> float:
    """Magnitude of the combined (delta, b_x) field, sqrt(delta^2 + b_x^2)."""
    return math.hypot(params.delta, params.b_x)


def classify_phase(b_perp: float, j: float) -> SpinPhase:
    scale = max(abs(b_perp), abs(j))
    if scale == 0.0 or abs(b_perp - j) <= CRITICAL_BAND * scale:
        return SpinPhase.CRITICAL
    return SpinPhase.FERROMAGNETIC if j > b_perp else SpinPhase.PARAMAGNETIC


def observables(params: IsingChainParams) -> IsingObservables:
    b_perp = transverse_field_magnitude(params)
    return IsingObservables(
        s_x=ground_state_sx(params),
        b_perp=b_perp,
        phase=classify_phase(b_perp, params.j),
    )


# ---------------------------------------------------------------------------
# field-axis magnetization m(B, j)
# ---------------------------------------------------------------------------


def _magnetization_finite(h, j, n):
    """Even-sector magnetization along the field for a finite chain.

    Vectorized over ``h`` (array or scalar).
    """
    k = (2.0 * np.arange(n // 2) + 1.0) * (np.pi / n)
    h = np.asarray(h, dtype=float)
    hk = h[..., None]
    lam = np.sqrt(hk * hk + j * j - 2.0 * hk * j * np.cos(k))
    num = hk - j * np.cos(k)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(lam > 0.0, num / np.where(lam > 0.0, lam, 1.0), 0.0)
    return (2.0 / n) * np.sum(terms, axis=-1)


def _magnetization_thermodynamic(h, j):
    """Thermodynamic-limit magnetization via complete elliptic integrals.

    (1/pi) * Int_0^pi (h - j cos k)/sqrt(h^2 + j^2 - 2 h j cos k) dk
        = [(h - j) K(mt) + (h + j) E(mt)] / (pi h),   mt = 4 h j / (h + j)^2.

    Exact at every h including the critical point h = j, where the
    (h - j) K term vanishes. Vectorized over ``h``.
    """
    h = np.asarray(h, dtype=float)
    if j == 0.0:
        return np.where(h > 0.0, 1.0, 0.0)
    hp = h + j
    p = np.where(h > 0.0, ((h - j) / hp) ** 2, 1.0)  # complementary parameter 1 - mt
    mt = np.where(h > 0.0, 4.0 * h * j / (hp * hp), 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        K = ellipkm1(np.where(p > 0.0, p, 1.0))
        E = ellipe(mt)
        out = ((h - j) * np.where(p > 0.0, K, 0.0) + hp * E) / (np.pi * np.where(h > 0.0, h, 1.0))
    out = np.where(p > 0.0, out, 2.0 / np.pi)  # h == j exactly
    return np.where(h > 0.0, out, 0.0)


def magnetization_quadrature(h: float, j: float, *, tol: float = 1e-10,
                             start_order: int = 64, max_order: int = 8192) -> float:
    """Reference evaluation of the thermodynamic-limit integral.

    Fixed-order Gauss-Legendre on [0, pi], order doubled until two successive
    orders agree to ``tol``. Exists as an independent cross-check of the
    elliptic closed form; convergence degrades near h = j and is reported
    rather than silently truncated.
    """
    if h == 0.0:
        return 0.0
    if j == 0.0:
        return 1.0
    prev = None
    order = start_order
    while order <= max_order:
        x, w = np.polynomial.legendre.leggauss(order)
        k = 0.5 * np.pi * (x + 1.0)
        lam = np.sqrt(h * h + j * j - 2.0 * h * j * np.cos(k))
        val = 0.5 * float(np.sum(w * (h - j * np.cos(k)) / lam))
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
        order *= 2
    raise QuadratureError(
        f"Gauss-Legendre order {max_order} did not reach {tol:g} agreement "
        f"at h={h!r}, j={j!r} (|B - j| too small)"
    )


def _magnetization(h, j, size: ChainSize):
    if isinstance(size, Finite):
        return _magnetization_finite(h, j, size.n)
    return _magnetization_thermodynamic(h, j)


# ---------------------------------------------------------------------------
# S_x and its b_x derivative
# ---------------------------------------------------------------------------


def ground_state_sx(params: IsingChainParams) -> float:
    """Per-spin <sigma_x> of the many-body ground state."""
    return float(ground_state_sx_array(params.delta, params.b_x, params.j, params.size))


def ground_state_sx_array(delta, b_x, j, size: ChainSize):
    """Vectorized ground_state_sx over ``b_x`` (array or scalar)."""
    delta = abs(delta)
    b_x = np.asarray(b_x, dtype=float)
    B = np.hypot(delta, b_x)
    m = _magnetization(B, j, size)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(B > 0.0, -m * b_x / np.where(B > 0.0, B, 1.0), 0.0)
    return out if out.shape else float(out)


def dsx_dbx(params: IsingChainParams) -> float:
    """dS_x/db_x at fixed delta, j, size.

    Central differences with one Richardson-extrapolation level. The step is
    scaled to the problem's energy scale; a vanishing scale or a
    non-convergent Richardson pair raises DerivativeError with the location.
    (Diverges at the chain critical point in the thermodynamic limit; the
    failure is reported, not masked.)
    """
    delta, b_x, j, size = abs(params.delta), params.b_x, params.j, params.size
    scale = max(j, abs(b_x), delta)
    if scale == 0.0:
        raise DerivativeError(
            "step-size underflow: all energy scales vanish",
            delta=delta, b_x=b_x, j=j, size=size,
        )
    h = 1e-5 * scale
    pts = np.array([b_x - h, b_x + h, b_x - h / 2, b_x + h / 2])
    s = ground_state_sx_array(delta, pts, j, size)
    d1 = (s[1] - s[0]) / (2.0 * h)
    d2 = (s[3] - s[2]) / h
    richardson = (4.0 * d2 - d1) / 3.0
    disagreement = abs(d2 - d1)
    if disagreement > 1e-4 * max(abs(richardson), 1e-3 / scale):
        raise DerivativeError(
            f"Richardson pair disagreement {disagreement:.3e} at "
            f"b_x={b_x!r} (chain near criticality?)",
            delta=delta, b_x=b_x, j=j, size=size,
        )
    return float(richardson)


# ---------------------------------------------------------------------------
# dense / Lanczos oracle on the full 2^n Hilbert space
# ---------------------------------------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_ISY = np.array([[0.0, 1.0], [-1.0, 0.0]])  # i * sigma_y, real


@lru_cache(maxsize=8)
def _chain_operators(n: int):
    """Sparse total sigma_x, total sigma_z and sum of sigma_y sigma_y terms."""
    def site(op, i):
        return sp.kron(
            sp.kron(sp.identity(2 ** i, format="csr"), sp.csr_matrix(op)),
            sp.identity(2 ** (n - i - 1), format="csr"),
            format="csr",
        )

    X = sum(site(_SX, i) for i in range(n))
    Z = sum(site(_SZ, i) for i in range(n))
    YY = sp.csr_matrix((2 ** n, 2 ** n))
    for i in range(n):
        # sigma_y sigma_y = -(i sigma_y)(i sigma_y), real matrix
        YY = YY - site(_ISY, i) @ site(_ISY, (i + 1) % n)
    return X.tocsr(), Z.tocsr(), YY.tocsr()


def _apply_site_product(u, vec, n):
    """Apply the product over all sites of the one-site operator ``u``."""
    psi = vec.reshape((2,) * n)
    for i in range(n):
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [i])), 0, i)
    return psi.reshape(-1)


def _exact_diag_ground(params: IsingChainParams, v0=None):
    """(S_x, ground vector) from the full 2^n Hamiltonian; v0 warm-starts Lanczos."""
    n = params.size.n
    delta, b_x, j = abs(params.delta), params.b_x, params.j
    X, Z, YY = _chain_operators(n)
    H = (-delta) * Z + b_x * X + (-j) * YY

    if n <= _DENSE_DIAG_MAX_SITES:
        vals, vecs = np.linalg.eigh(H.toarray())
        vals, vecs = vals[:2], vecs[:, :2]
    else:
        vals, vecs = eigsh(H, k=4, which="SA", v0=v0, ncv=32)
        order = np.argsort(vals)
        vals, vecs = vals[order[:2]], vecs[:, order[:2]]

    scale = max(delta + abs(b_x) + j, 1.0)
    if vals[1] - vals[0] < 1e-8 * scale:
        # quasi-degenerate ferromagnetic doublet: project onto the +1 sector
        # of the pi rotation about the combined-field axis (the symmetry of
        # the even-parity free-fermion ground state), which preserves <sx>
        B = math.hypot(delta, b_x)
        u = (-b_x * _SX + delta * _SZ) / B if B > 0.0 else _SZ
        uv = [_apply_site_product(u, vecs[:, a], n) for a in range(2)]
        sub = np.array([[vecs[:, a] @ uv[b] for b in range(2)] for a in range(2)])
        w, v = np.linalg.eigh(0.5 * (sub + sub.T))
        coeff = v[:, int(np.argmax(w))]
        psi = coeff[0] * vecs[:, 0] + coeff[1] * vecs[:, 1]
        psi /= np.linalg.norm(psi)
    else:
        psi = vecs[:, 0]
    return float(psi @ (X @ psi)) / n, vecs[:, 0]


def exact_diag_sx(params: IsingChainParams) -> float:
    """Independent oracle: <sigma_x> per spin by diagonalizing the full
    2^n Hamiltonian (dense for small n, Lanczos above), periodic boundary."""
    if not isinstance(params.size, Finite):
        raise ParameterError("exact_diag_sx requires a Finite size")
    if params.size.n > MAX_EXACT_DIAG_SITES:
        raise ParameterError(
            f"exact_diag_sx limited to n <= {MAX_EXACT_DIAG_SITES} sites, "
            f"got {params.size.n}"
        )
    return _exact_diag_ground(params)[0]


def oracle_grid_max_deviation(j: float = 1.0, sizes=(4, 8, 12), field_values=None) -> float:
    """Max |ground_state_sx - exact_diag_sx| over the cross-check grid.

    Defaults to delta, b_x in {0, 0.1, ..., 1.5} * j and n in {4, 8, 12}.
    Lanczos runs are warm-started along each b_x row.
    """
    if field_values is None:
        field_values = np.round(np.arange(0.0, 1.51, 0.1), 12) * j
    worst = 0.0
    for n in sizes:
        for delta in field_values:
            v0 = None
            for b_x in field_values:
                p = IsingChainParams(float(delta), float(b_x), j, Finite(n))
                ed, v0 = _exact_diag_ground(p, v0)
                worst = max(worst, abs(ed - ground_state_sx(p)))
    return worst
