"""Steady states, stability and fluctuations of a driven Ising chain in a
dissipative cavity, built on an exact free-fermion chain solver."""

from .chain import (
    Finite,
    IsingChainParams,
    IsingObservables,
    SpinPhase,
    THERMODYNAMIC,
    ThermodynamicLimit,
    dsx_dbx,
    exact_diag_sx,
    ground_state_sx,
    observables,
    oracle_grid_max_deviation,
    transverse_field_magnitude,
)
from .errors import (
    CavityIsingError,
    ConfigError,
    CriticalPointNotFound,
    DegenerateEigenvalueError,
    DerivativeError,
    FitWindowError,
    NumericalError,
    ParameterError,
    QuadratureError,
    ResolutionError,
)
from .fluct import (
    ExponentFit,
    FluctuationSpectrum,
    Side,
    StabilityMatrix,
    biorthogonal_eigvecs,
    critical_exponent_fit,
    eigenvalues_closed_form,
    fluct_photon_number,
    lyapunov_photon_number,
    spectrum,
    stability_matrix,
)
from .phase import (
    Axis,
    BoundarySample,
    DetuningMinimumReport,
    PhaseBoundary,
    boundary_vs_parameter,
    detuning_minimum_check,
)
from .steady import (
    BranchPoint,
    CavityPhase,
    CriticalPoints,
    SweepResult,
    SystemParams,
    critical_points,
    find_fixed_points,
    photon_from_sx,
    residual,
    stability_coefficient,
    stability_coefficient_printed,
    stable_superradiant_branch,
    steady_field_amplitude,
    sweep_hysteresis,
    vacuum_branch,
    vacuum_marginality_g2,
)

__version__ = "0.1.0"
