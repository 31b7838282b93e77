"""Tunneling through N identical, equally spaced rectangular barriers.

The exact transfer-matrix solution sits next to the opaque-barrier
factorization, the two-barrier decomposition and phase-time analysis, so the
approximations can be checked directly against the exact result.
"""
from .dispersion import DispersionKind, DispersionModel, Wavevectors, dispersion_eval
from .double_barrier import (
    AppendixCoefficients,
    PartialDecomposition,
    appendix_coefficients,
    decompose_exact,
    geometric_series_check,
    no_reflection_budget,
)
from .errors import (
    AmplitudeUnderflowError,
    ConditioningWarning,
    DecompositionSingularError,
    DivergentSeriesError,
    DomainError,
    MultibarrierError,
    NonRootWarning,
    OpaqueApproximationError,
    OpaqueRegimeWarning,
    SingularSystemError,
)
from .exact_solver import (
    BarrierSystem,
    ScatteringScan,
    ScatteringSolution,
    brute_force_solve,
    evaluate_wavefunction,
    interface_residuals,
    solve_exact,
    solve_scan,
    transmission,
    unitarity_defect,
)
from .opaque_model import (
    OpaqueFactorization,
    ResonanceReport,
    find_resonances,
    opaque_phase,
    opaque_probability,
    opaque_transmission,
    resonance_time_budget,
)
from .timing import (
    DiffMethod,
    PhaseBudget,
    PhaseTimeResult,
    hartman_scan,
    n_independence_scan,
    phase_budget,
    phase_time,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
