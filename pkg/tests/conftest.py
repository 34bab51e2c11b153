import pytest

from cavity_ising import Finite, SystemParams, THERMODYNAMIC, critical_points

# central hysteresis parameter set (coupling is the energy unit)
FIG2 = dict(detuning=0.8, loss=0.5, splitting=0.3, coupling=1.0)


@pytest.fixture(scope="session")
def fig2_params():
    return SystemParams(**FIG2, drive=1.0, size=Finite(200))


@pytest.fixture(scope="session")
def fig2_params_td():
    return SystemParams(**FIG2, drive=1.0, size=THERMODYNAMIC)


@pytest.fixture(scope="session")
def fig2_crit(fig2_params):
    return critical_points(fig2_params)


@pytest.fixture(scope="session")
def fig2_crit_td(fig2_params_td):
    return critical_points(fig2_params_td)
