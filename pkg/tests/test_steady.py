"""Self-consistency: fixed points, stability, hysteresis, critical drives."""

import math
from dataclasses import replace

import numpy as np
import pytest

from cavity_ising import (
    CavityPhase,
    Finite,
    ParameterError,
    ResolutionError,
    SystemParams,
    THERMODYNAMIC,
    critical_points,
    find_fixed_points,
    photon_from_sx,
    residual,
    stability_coefficient,
    stable_superradiant_branch,
    steady_field_amplitude,
    sweep_hysteresis,
    vacuum_marginality_g2,
)
from cavity_ising import steady as steady_mod


def params(drive, size=Finite(200), **overrides):
    base = dict(detuning=0.8, loss=0.5, splitting=0.3, coupling=1.0)
    base.update(overrides)
    return SystemParams(**base, drive=drive, size=size)


class TestPhotonFromSx:
    def test_zero_source(self):
        assert photon_from_sx(0.0, params(1.0)) == 0.0

    def test_zero_detuning_gives_vacuum(self):
        p = SystemParams(detuning=0.0, loss=0.5, splitting=0.3, drive=1.0)
        assert photon_from_sx(1.0, p) == 0.0

    def test_direct_arithmetic(self):
        # -0.8 * 1 * (-0.5) / (0.64 + 0.0625)
        assert photon_from_sx(-0.5, params(1.0)) == pytest.approx(
            0.5693950177935944, abs=1e-15
        )

    def test_zero_denominator_rejected(self):
        with pytest.raises(ParameterError):
            SystemParams(detuning=0.0, loss=0.0, splitting=0.3, drive=1.0)


class TestResidual:
    def test_vacuum_is_always_a_fixed_point(self):
        for drive in (0.0, 0.5, 0.87, 2.0):
            assert abs(residual(0.0, params(drive))) <= 1e-12

    def test_odd_symmetry(self):
        p = params(0.9)
        for phi in (0.1, 0.37, 0.8):
            assert residual(-phi, p) == pytest.approx(-residual(phi, p), abs=1e-14)

    def test_zero_at_reported_roots(self):
        p = params(0.87)
        for b in find_fixed_points(p):
            assert abs(residual(b.phi_s, p)) <= 1e-9


class TestFindFixedPoints:
    def test_single_root_below_g1(self):
        points = find_fixed_points(params(0.3))
        assert len(points) == 1
        assert points[0].phi_s == 0.0
        assert points[0].stable
        assert points[0].cavity_phase == CavityPhase.NORMAL

    def test_five_roots_in_bistable_window(self, fig2_crit):
        mid = 0.5 * (fig2_crit.g1 + fig2_crit.g2)
        points = find_fixed_points(params(mid))
        assert len(points) == 5
        stable_flags = [p.stable for p in points]
        phis = [p.phi_s for p in points]
        assert phis[0] == 0.0 and stable_flags[0]
        # inner pair unstable, outer pair stable
        assert not stable_flags[1] and not stable_flags[2]
        assert stable_flags[3] and stable_flags[4]

    def test_three_roots_above_g2(self, fig2_crit):
        points = find_fixed_points(params(fig2_crit.g2 * 1.1))
        assert len(points) == 3
        assert not points[0].stable
        assert points[1].stable and points[2].stable

    def test_z2_pairing(self):
        points = find_fixed_points(params(0.87))
        positives = [p for p in points if p.phi_s > 1e-8]
        for p in positives:
            partner = min(points, key=lambda q: abs(q.phi_s + p.phi_s))
            assert partner.phi_s == pytest.approx(-p.phi_s, abs=1e-12)
            assert abs(partner.c_s) == pytest.approx(abs(p.c_s), abs=1e-10)
            assert partner.stable == p.stable

    def test_roots_within_photon_bound(self):
        for drive in (0.87, 1.2, 2.0):
            p = params(drive)
            bound = abs(p.detuning) * drive / p.lorentzian
            for b in find_fixed_points(p):
                assert abs(b.phi_s) <= bound + 1e-9

    def test_simultaneity_of_order_parameters(self):
        for drive in (0.87, 1.2):
            for b in find_fixed_points(params(drive)):
                if b.stable:
                    assert (abs(b.phi_s) > 1e-8) == (abs(b.s_x) > 1e-8)

    def test_spin_phase_split_on_branches(self, fig2_crit):
        # upper stable branch paramagnetic, vacuum branch ferromagnetic
        points = find_fixed_points(params(0.5 * (fig2_crit.g1 + fig2_crit.g2)))
        assert points[0].spin_phase.value == "ferromagnetic"
        upper = max(points, key=lambda p: p.phi_s)
        assert upper.spin_phase.value == "paramagnetic"

    def test_resolution_error_on_unseparable_roots(self, fig2_crit):
        # a 3-node grid misses the bistable pair; the dip check proves two
        # roots exist, but a dedupe window wider than their separation
        # cannot separate them
        mid = 0.5 * (fig2_crit.g1 + fig2_crit.g2)
        with pytest.raises(ResolutionError):
            find_fixed_points(params(mid), grid_points=3, dedupe_tol=0.5)

    def test_coarse_grid_recovers_fold_pair_via_dip(self, fig2_crit):
        mid = 0.5 * (fig2_crit.g1 + fig2_crit.g2)
        coarse = find_fixed_points(params(mid), grid_points=3)
        fine = find_fixed_points(params(mid))
        assert len(coarse) == len(fine) == 5
        for a, b in zip(coarse, fine):
            assert a.phi_s == pytest.approx(b.phi_s, abs=1e-9)


class TestStabilityCoefficient:
    def test_small_drive_limit_is_one(self):
        assert stability_coefficient(0.0, params(1e-8)) == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_marginal_at_g2(self, fig2_crit):
        assert stability_coefficient(0.0, params(fig2_crit.g2)) == pytest.approx(0.0, abs=1e-6)

    def test_fig2_branch_signs(self, fig2_crit):
        mid = 0.5 * (fig2_crit.g1 + fig2_crit.g2)
        points = find_fixed_points(params(mid))
        # solid/dashed split: vacuum and outer branches stable, middle unstable
        assert points[0].c_s > 0
        assert points[1].c_s < 0 and points[2].c_s < 0
        assert points[3].c_s > 0 and points[4].c_s > 0


class TestCriticalPoints:
    def test_hysteresis_order(self, fig2_crit):
        assert fig2_crit.g1 < fig2_crit.g2
        assert not fig2_crit.merged

    def test_thermodynamic_limit_matches(self, fig2_crit, fig2_crit_td):
        assert fig2_crit_td.g1 == pytest.approx(fig2_crit.g1, rel=1e-6)
        assert fig2_crit_td.g2 == pytest.approx(fig2_crit.g2, rel=1e-6)
        assert fig2_crit_td.g1 < fig2_crit_td.g2

    def test_g2_closed_form_on_random_parameter_sets(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            p = SystemParams(
                detuning=rng.uniform(0.2, 1.5),
                loss=rng.uniform(0.1, 1.5),
                splitting=rng.uniform(0.05, 0.95),
                coupling=1.0,
                drive=1.0,
                size=Finite(200),
            )
            cp = critical_points(p)
            assert cp.g2 == pytest.approx(vacuum_marginality_g2(p), rel=1e-6)

    def test_merged_at_large_splitting(self):
        cp = critical_points(params(1.0, splitting=1.5))
        assert cp.merged
        assert cp.g1 <= cp.g2
        assert (cp.g2 - cp.g1) / cp.g2 < 1e-6

    def test_g1_le_g2_always(self):
        for splitting in (0.1, 0.5, 1.0, 1.2):
            cp = critical_points(params(1.0, splitting=splitting))
            assert cp.g1 <= cp.g2


class TestSweepHysteresis:
    def test_forward_jump_after_backward_drop(self, fig2_crit):
        grid = np.linspace(0.4, 1.4, 41)
        sweep = sweep_hysteresis(params(1.0), grid)
        fwd_jump = grid[np.argmax(sweep.forward > 0)]
        bwd_drop = grid[np.argmax(sweep.backward > 0)]
        assert bwd_drop < fwd_jump
        assert fwd_jump == pytest.approx(fig2_crit.g2, abs=np.diff(grid)[0] * 1.5)
        assert bwd_drop == pytest.approx(fig2_crit.g1, abs=np.diff(grid)[0] * 1.5)

    def test_no_hysteresis_at_large_splitting(self):
        grid = np.linspace(0.5, 1.3, 33)
        sweep = sweep_hysteresis(params(1.0, splitting=1.5), grid)
        assert np.allclose(sweep.forward, sweep.backward, atol=1e-10)

    def test_all_vacuum_below_g1(self):
        grid = np.linspace(0.05, 0.5, 10)
        sweep = sweep_hysteresis(params(1.0), grid)
        assert np.all(sweep.forward == 0.0)
        assert np.all(sweep.backward == 0.0)

    def test_serial_equals_parallel(self):
        grid = np.linspace(0.5, 1.2, 15)
        serial = sweep_hysteresis(params(1.0), grid, threads=1)
        parallel = sweep_hysteresis(params(1.0), grid, threads=4)
        assert np.array_equal(serial.forward, parallel.forward)
        assert np.array_equal(serial.backward, parallel.backward)
        for a, b in zip(serial.branches, parallel.branches):
            assert a == b

    def test_grid_must_increase(self):
        with pytest.raises(ParameterError):
            sweep_hysteresis(params(1.0), [0.5, 0.4])


class TestSteadyFieldAmplitude:
    def test_zero_polarization(self):
        p = params(1.0)
        branch = steady_mod.vacuum_branch(p)
        assert steady_field_amplitude(branch, p) == 0j

    def test_quadrature_identity(self):
        for phase in (0.0, math.pi / 4, math.pi / 2, 1.0):
            p = params(1.1, drive_phase=phase)
            branch = stable_superradiant_branch(p)
            a_s = steady_field_amplitude(branch, p)
            quad = 0.5 * (a_s.conjugate() * complex(math.cos(phase), math.sin(phase))
                          + a_s * complex(math.cos(phase), -math.sin(phase)))
            assert quad.real == pytest.approx(branch.phi_s, abs=1e-10)
            assert abs(quad.imag) <= 1e-15

    def test_amplitude_dominates_quadrature(self):
        p = params(1.1)
        for b in find_fixed_points(p):
            assert abs(b.a_s) ** 2 >= b.phi_s ** 2 - 1e-12

    def test_drive_phase_enters_only_amplitude(self):
        base = params(1.1)
        ref = find_fixed_points(base)
        for phase in (math.pi / 4, math.pi / 2):
            rotated = find_fixed_points(replace(base, drive_phase=phase))
            for a, b in zip(ref, rotated):
                assert b.phi_s == pytest.approx(a.phi_s, abs=1e-10)
                assert b.s_x == pytest.approx(a.s_x, abs=1e-10)
                assert b.c_s == pytest.approx(a.c_s, abs=1e-10)
                expected = a.a_s * complex(math.cos(phase), math.sin(phase))
                assert b.a_s == pytest.approx(expected, abs=1e-10)
