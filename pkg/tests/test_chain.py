"""Chain solver: trivial cases, the exact-diagonalization oracle, symmetries."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_ising.chain import (
    Finite,
    IsingChainParams,
    SpinPhase,
    THERMODYNAMIC,
    dsx_dbx,
    exact_diag_sx,
    ground_state_sx,
    magnetization_quadrature,
    observables,
    transverse_field_magnitude,
    _magnetization_thermodynamic,
)
from cavity_ising.errors import DerivativeError, ParameterError


def chain(delta, b_x, j, size=THERMODYNAMIC):
    return IsingChainParams(delta, b_x, j, size)


class TestTransverseFieldMagnitude:
    def test_pythagorean_triple(self):
        assert transverse_field_magnitude(chain(0.3, 0.4, 1.0)) == pytest.approx(0.5, abs=1e-15)

    def test_zero(self):
        assert transverse_field_magnitude(chain(0.0, 0.0, 1.0)) == 0.0

    def test_single_field(self):
        assert transverse_field_magnitude(chain(0.3, 0.0, 1.0)) == pytest.approx(0.3, abs=1e-15)


class TestGroundStateSx:
    def test_zero_x_field_vanishes(self):
        for size in (Finite(8), Finite(200), THERMODYNAMIC):
            assert ground_state_sx(chain(0.3, 0.0, 1.0, size)) == 0.0

    def test_decoupled_spins_fully_antipolarize(self):
        for size in (Finite(4), THERMODYNAMIC):
            assert ground_state_sx(chain(0.0, 0.7, 0.0, size)) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_exact_diag_n10(self):
        p = chain(0.3, 0.2, 1.0, Finite(10))
        assert ground_state_sx(p) == pytest.approx(exact_diag_sx(p), abs=1e-10)

    def test_degenerate_input_returns_zero(self):
        assert ground_state_sx(chain(0.0, 0.0, 1.0, Finite(8))) == 0.0
        assert ground_state_sx(chain(0.0, 0.0, 1.0)) == 0.0

    def test_negative_delta_maps_to_positive(self):
        assert ground_state_sx(chain(-0.4, 0.3, 1.0)) == ground_state_sx(chain(0.4, 0.3, 1.0))

    @settings(max_examples=60, deadline=None)
    @given(
        delta=st.floats(0.0, 1.5),
        b_x=st.floats(-1.5, 1.5),
        j=st.floats(0.0, 2.0),
    )
    def test_odd_in_bx_and_bounded(self, delta, b_x, j):
        size = Finite(12)
        plus = ground_state_sx(IsingChainParams(delta, b_x, j, size))
        minus = ground_state_sx(IsingChainParams(delta, -b_x, j, size))
        assert abs(plus + minus) <= 1e-12
        assert abs(plus) <= 1.0 + 1e-12

    @settings(max_examples=30, deadline=None)
    @given(
        delta=st.floats(0.05, 1.5),
        b_x=st.floats(0.05, 1.5),
        lam=st.floats(0.1, 10.0),
    )
    def test_scale_invariance(self, delta, b_x, lam):
        base = ground_state_sx(chain(delta, b_x, 1.0))
        scaled = ground_state_sx(chain(lam * delta, lam * b_x, lam))
        assert scaled == pytest.approx(base, abs=1e-11)

    def test_monotone_saturation(self):
        values = [abs(ground_state_sx(chain(0.3, b, 1.0, Finite(200))))
                  for b in (0.2, 0.5, 1.0, 2.0, 10.0, 100.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert values[-1] > 0.999

    def test_finite_size_converges_to_thermodynamic(self):
        # stable-branch field values of the hysteresis parameter set
        for b_x in (0.0, 1.2, 1.6, 2.0):
            exact = ground_state_sx(chain(0.3, b_x, 1.0))
            errs = [abs(ground_state_sx(chain(0.3, b_x, 1.0, Finite(n))) - exact)
                    for n in (20, 60, 200)]
            assert errs[2] <= errs[0] + 1e-15
            assert errs[2] < 1e-4


class TestDsxDbx:
    def test_single_spin_slope(self):
        # one decoupled spin: S_x = -b_x / sqrt(delta^2 + b_x^2)
        assert dsx_dbx(chain(0.5, 0.0, 0.0)) == pytest.approx(-2.0, abs=1e-9)

    def test_matches_exact_diag_derivative(self):
        p = chain(0.3, 0.2, 1.0, Finite(10))
        h = 1e-5
        oracle = (
            exact_diag_sx(chain(0.3, 0.2 + h, 1.0, Finite(10)))
            - exact_diag_sx(chain(0.3, 0.2 - h, 1.0, Finite(10)))
        ) / (2 * h)
        assert dsx_dbx(p) == pytest.approx(oracle, abs=1e-6)

    def test_thermodynamic_matches_large_chain(self):
        td = dsx_dbx(chain(0.3, 0.0, 1.0))
        big = dsx_dbx(chain(0.3, 0.0, 1.0, Finite(2000)))
        assert td == pytest.approx(big, abs=1e-6)

    def test_negative_at_zero_field_paramagnet(self):
        assert dsx_dbx(chain(1.5, 0.0, 1.0)) < 0.0

    def test_all_scales_zero_is_reported(self):
        with pytest.raises(DerivativeError):
            dsx_dbx(chain(0.0, 0.0, 0.0))

    def test_critical_divergence_is_reported(self):
        # thermodynamic limit at the chain critical point B = j
        with pytest.raises(DerivativeError) as err:
            dsx_dbx(chain(0.0, 1.0, 1.0))
        assert err.value.b_x == 1.0


class TestExactDiag:
    def test_symmetry_zero(self):
        assert exact_diag_sx(chain(0.3, 0.0, 1.0, Finite(8))) == pytest.approx(0.0, abs=1e-12)

    def test_product_state(self):
        assert exact_diag_sx(chain(0.0, 0.5, 0.0, Finite(4))) == pytest.approx(-1.0, abs=1e-12)

    def test_cross_check_n12(self):
        p = chain(0.3, 0.2, 1.0, Finite(12))
        assert exact_diag_sx(p) == pytest.approx(ground_state_sx(p), abs=1e-10)

    def test_frozen_value_n10(self):
        assert exact_diag_sx(chain(0.3, 0.2, 1.0, Finite(10))) == pytest.approx(
            -0.10171990612132675, abs=1e-12
        )

    def test_site_budget_enforced(self):
        with pytest.raises(ParameterError):
            exact_diag_sx(chain(0.3, 0.2, 1.0, Finite(16)))
        with pytest.raises(ParameterError):
            exact_diag_sx(chain(0.3, 0.2, 1.0, THERMODYNAMIC))


class TestSizeValidation:
    @pytest.mark.parametrize("n", [0, 1, 3, 7, -2])
    def test_bad_site_counts(self, n):
        with pytest.raises(ParameterError):
            Finite(n)

    def test_negative_coupling(self):
        with pytest.raises(ParameterError):
            IsingChainParams(0.3, 0.2, -1.0, Finite(4))


class TestQuadratureReference:
    def test_agrees_with_elliptic_closed_form(self):
        for h in (0.2, 0.7, 0.95, 1.05, 1.4, 3.0):
            quad = magnetization_quadrature(h, 1.0)
            closed = float(_magnetization_thermodynamic(np.array(h), 1.0))
            assert quad == pytest.approx(closed, abs=1e-10)

    def test_critical_value(self):
        closed = float(_magnetization_thermodynamic(np.array(1.0), 1.0))
        assert closed == pytest.approx(2.0 / math.pi, abs=1e-14)


class TestObservables:
    def test_phase_labels(self):
        assert observables(chain(0.3, 0.0, 1.0)).phase == SpinPhase.FERROMAGNETIC
        assert observables(chain(1.5, 1.0, 1.0)).phase == SpinPhase.PARAMAGNETIC
        assert observables(chain(1.0, 0.0, 1.0)).phase == SpinPhase.CRITICAL

    def test_b_perp(self):
        assert observables(chain(0.3, 0.4, 1.0)).b_perp == pytest.approx(0.5, abs=1e-15)
