"""Phase boundaries and the loss/2 detuning minimum."""

import numpy as np
import pytest

from cavity_ising import (
    Axis,
    Finite,
    ParameterError,
    SystemParams,
    boundary_vs_parameter,
    detuning_minimum_check,
)


@pytest.fixture(scope="module")
def base():
    return SystemParams(detuning=0.8, loss=0.5, splitting=0.3, coupling=1.0,
                        drive=1.0, size=Finite(200))


@pytest.fixture(scope="module")
def splitting_boundary(base):
    grid = np.linspace(0.1, 2.0, 40)
    return boundary_vs_parameter(base, Axis.SPLITTING_RATIO, grid)


class TestBoundaries:
    def test_loss_axis_monotone(self, base):
        grid = np.linspace(0.05, 2.0, 12)
        boundary = boundary_vs_parameter(base, Axis.LOSS, grid)
        g1s = [s.g1 for s in boundary.samples]
        g2s = [s.g2 for s in boundary.samples]
        assert all(b >= a - 1e-10 for a, b in zip(g1s, g1s[1:]))
        assert all(b >= a - 1e-10 for a, b in zip(g2s, g2s[1:]))

    def test_detuning_divergence_at_zero(self, base):
        # the critical drives scale as 1/sqrt(q) with q = D/(D^2 + loss^2/4),
        # so g(D)/g(loss/2) = sqrt(loss/(4 D)) for D -> 0: exactly 5x at
        # D = 0.01 loss and beyond 10x by D = 0.002 loss
        kappa = base.loss
        grid = [0.002 * kappa, 0.01 * kappa, kappa / 2, 2.0]
        boundary = boundary_vs_parameter(base, Axis.DETUNING, grid)
        tiny, near_zero, minimum, _ = boundary.samples
        assert near_zero.g1 == pytest.approx(5 * minimum.g1, rel=0.02)
        assert near_zero.g2 == pytest.approx(5 * minimum.g2, rel=0.02)
        assert tiny.g1 > 10 * minimum.g1
        assert tiny.g2 > 10 * minimum.g2

    def test_detuning_axis_rejects_nonpositive(self, base):
        with pytest.raises(ParameterError):
            boundary_vs_parameter(base, Axis.DETUNING, [0.0, 0.5])

    def test_splitting_merge(self, splitting_boundary):
        by_value = {round(s.value, 6): s for s in splitting_boundary.samples}
        low = min(splitting_boundary.samples, key=lambda s: abs(s.value - 0.3))
        high = min(splitting_boundary.samples, key=lambda s: abs(s.value - 1.5))
        assert low.merged is False
        assert high.merged is True
        assert all(s.g1 <= s.g2 + 1e-12 for s in splitting_boundary.samples)
        assert by_value  # samples cover the grid

    def test_merge_point_location(self, splitting_boundary):
        first_merged = next(s.value for s in splitting_boundary.samples if s.merged)
        assert 1.0 <= first_merged <= 1.3

    def test_merge_persistence(self, splitting_boundary):
        seen = False
        for s in splitting_boundary.samples:
            if s.merged:
                seen = True
            elif seen:
                pytest.fail(f"boundary un-merged at splitting ratio {s.value}")
        assert seen

    def test_boundary_continuity(self, splitting_boundary):
        samples = splitting_boundary.samples
        for a, b in zip(samples, samples[1:]):
            if a.merged != b.merged:
                continue  # the fold disappears across the merge point
            assert abs(b.g1 - a.g1) / a.g1 < 0.2
            assert abs(b.g2 - a.g2) / a.g2 < 0.2

    def test_parallel_matches_serial(self, base):
        grid = np.linspace(0.2, 1.0, 6)
        serial = boundary_vs_parameter(base, Axis.LOSS, grid, threads=1)
        parallel = boundary_vs_parameter(base, Axis.LOSS, grid, threads=4)
        assert serial.samples == parallel.samples


@pytest.fixture(scope="module")
def report(base):
    return detuning_minimum_check(base, (0.01, 0.02, 0.04))


class TestDetuningMinimum:

    def test_argmin_at_half_loss(self, report, base):
        assert report.minimum_on_grid
        assert abs(report.argmin_g1 - base.loss / 2) <= report.grid_step * 1.001
        assert abs(report.argmin_g2 - base.loss / 2) <= report.grid_step * 1.001

    def test_symmetric_residual_is_quartic(self, report):
        # halving eps cuts the +/- averaged residual ~16x
        assert report.scaling_ok
        for ratio in report.sym_ratios:
            assert 16.0 * 0.7 <= ratio <= 16.0 * 1.3

    def test_one_sided_residual_is_cubic(self, report):
        # the +eps and -eps residuals separately carry an O(eps^3) term
        rp = [c.residual_plus for c in report.checks]
        for small, big in zip(rp, rp[1:]):
            assert 8.0 * 0.6 <= big / small <= 8.0 * 1.4

    def test_minimum_is_strict(self, report):
        assert report.one_sided_above

    def test_eps_validation(self, base):
        with pytest.raises(ParameterError):
            detuning_minimum_check(base, (0.3,))  # eps not << loss
        with pytest.raises(ParameterError):
            detuning_minimum_check(base, (-0.01,))
