"""Two-barrier decomposition into partial coefficients and multiple reflections.

With the gap wave ``A3 e^{ikx} + B3 e^{-ikx}`` the partial coefficients are
defined by

    R = R1 + B3 T1,   T = A3 T2,   A3 = T1 S,   B3 = A3 R2 e^{ikL},
    S = 1 / (1 - R1 R2)

and ``decompose_exact`` inverts these relations on the exact solution. The
opaque closed forms for the same quantities are provided alongside so they can
be tested against it.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .dispersion import DispersionModel, Wavevectors, dispersion_eval
from .errors import (
    DecompositionSingularError,
    DivergentSeriesError,
    DomainError,
    OpaqueApproximationError,
)
from .exact_solver import BarrierSystem, ScatteringSolution
from .opaque_model import c0_factor, cavity_denominator, cavity_factor


@dataclass(frozen=True)
class PartialDecomposition:
    r1: complex
    t1: complex
    r2: complex
    t2: complex
    s: complex
    # opaque-limit closed forms; None when the frequency sits on a resonance
    f_factor: Optional[float] = None
    r_ob: Optional[complex] = None
    t_ob: Optional[complex] = None
    r_q: Optional[complex] = None
    t_q: Optional[complex] = None
    r_r: Optional[complex] = None
    t_r: Optional[complex] = None
    r1_0: Optional[complex] = None
    t1_0: Optional[complex] = None
    r1_0_ors: Optional[complex] = None
    s_half_period: Optional[complex] = None


@dataclass(frozen=True)
class AppendixCoefficients:
    r: complex
    a2: complex
    b2: complex
    a3: complex
    b3: complex
    a4: complex
    b4: complex
    t: complex


class NoReflectionBudget(NamedTuple):
    deficit: float
    ors_excess: float


def _require_two(system):
    if system.n_barriers != 2:
        raise DomainError(f"double-barrier formulas need N = 2, got N = {system.n_barriers}")


def _mirror(w):
    """(k - i chi) / (k + i chi), the unimodular opaque reflection factor."""
    return (w.k - 1j * w.chi) / (w.k + 1j * w.chi)


def one_barrier_coefficients(w: Wavevectors, a: float) -> tuple[complex, complex]:
    """Opaque single-barrier (R_OB, T_OB), unitary up to O(e^{-4 chi a})."""
    c0 = c0_factor(w)
    e = math.exp(-w.chi * a)
    r_ob = _mirror(w) * (1.0 - c0 * e * e)
    t_ob = c0 * cmath.exp(-1j * w.k * a) * e
    return r_ob, t_ob


def correction_terms(w: Wavevectors, system: BarrierSystem):
    """(R_Q, T_Q, R_R, T_R) for the first barrier of a double barrier.

    F here is the two-barrier cavity factor (exponent 1).
    """
    _require_two(system)
    k, a, period = w.k, system.width, system.period
    f = cavity_factor(w, system.gap, 1)
    rho = _mirror(w)
    e = math.exp(-w.chi * a)
    cav = cmath.exp(2j * k * (period - a))
    r_q = -(rho**3) * f * f * cav * e * e
    r_r = rho**3 * f * f * cmath.exp(1j * k * period) * e * e
    # e^{2ik(L-a)} e^{-ikL} combined first, so L = 2a gives T_Q = -T_R exactly
    t_q = rho**2 * f * cmath.exp(1j * k * (2.0 * (period - a) - period)) * e
    t_r = -(rho**2) * f * e
    return r_q, t_q, r_r, t_r


def no_reflection_coefficients(w: Wavevectors, system: BarrierSystem):
    """(R1^0, T1^0, R1^0 in the alternative parametrization)."""
    r_ob, t_ob = one_barrier_coefficients(w, system.width)
    r_q, t_q, _, _ = correction_terms(w, system)
    f = cavity_factor(w, system.gap, 1)
    e2 = math.exp(-2.0 * w.chi * system.width)
    r_ors = r_ob + _mirror(w) * c0_factor(w) * f * cmath.exp(1j * w.k * system.gap) * e2
    return r_ob + r_q, t_ob + t_q, r_ors


def no_reflection_budget(w: Wavevectors, system: BarrierSystem) -> NoReflectionBudget:
    """Probability missing (deficit) or in excess when multiple reflections are dropped.

    Both reflection amplitudes have the form rho * (1 + delta) with |rho| = 1, so
    |R|^2 - 1 is evaluated as 2 Re(delta) + |delta|^2; this keeps full relative
    precision when the budget is far below machine epsilon.
    """
    _require_two(system)
    k, gap = w.k, system.gap
    c0 = c0_factor(w)
    rho = _mirror(w)
    f = cavity_factor(w, gap, 1)
    e2 = math.exp(-2.0 * w.chi * system.width)
    _, t1_0, _ = no_reflection_coefficients(w, system)
    delta = -c0 * e2 - rho * rho * f * f * cmath.exp(2j * k * gap) * e2
    delta_ors = -c0 * e2 + c0 * f * cmath.exp(1j * k * gap) * e2
    t2 = abs(t1_0) ** 2
    deficit = -(2.0 * delta.real + abs(delta) ** 2 + t2)
    excess = 2.0 * delta_ors.real + abs(delta_ors) ** 2 + t2
    return NoReflectionBudget(deficit=deficit, ors_excess=excess)


def multiple_reflection_probability(w: Wavevectors, system: BarrierSystem) -> float:
    """F^2 e^{-2 chi a}."""
    f = cavity_factor(w, system.gap, 1)
    return f * f * math.exp(-2.0 * w.chi * system.width)


def half_period_s(w: Wavevectors, period: float) -> complex:
    """Leading opaque term of S written with half-period arguments k L / 2."""
    k, chi = w.k, w.chi
    half = float(cavity_denominator(k, chi, period / 2.0))
    return cmath.exp(-1j * k * period / 2.0) * (2.0 * chi * k / half) / c0_factor(w)


def decompose_exact(
    solution: ScatteringSolution, system: BarrierSystem, model: DispersionModel
) -> PartialDecomposition:
    """Partial coefficients from the exact R, T, A3, B3 of a two-barrier solution."""
    _require_two(system)
    if solution.n_barriers != 2:
        raise DomainError("solution was not computed for a two-barrier system")
    k, period = solution.k, system.period
    a3, b3 = complex(solution.gap_coeffs[0, 0]), complex(solution.gap_coeffs[0, 1])
    big_r, big_t = solution.R, solution.T
    back = b3 * cmath.exp(-1j * k * period)
    den = 1.0 - b3 * back
    if abs(den) < 1e-12 or abs(a3) < 1e-300:
        raise DecompositionSingularError(
            f"partial decomposition singular (|1 - B3^2 e^-ikL| = {abs(den):.3e}, "
            f"|A3| = {abs(a3):.3e})"
        )
    r1 = (big_r - a3 * b3) / den
    t1 = (a3 - back * big_r) / den
    r2 = back / a3
    t2 = big_t / a3
    s = 1.0 / (1.0 - r1 * r2)

    w = dispersion_eval(model, solution.omega)
    try:
        f = cavity_factor(w, system.gap, 1)
    except OpaqueApproximationError:
        return PartialDecomposition(r1=r1, t1=t1, r2=r2, t2=t2, s=s)
    r_ob, t_ob = one_barrier_coefficients(w, system.width)
    r_q, t_q, r_r, t_r = correction_terms(w, system)
    r1_0, t1_0, r1_0_ors = no_reflection_coefficients(w, system)
    try:
        s_fn = half_period_s(w, period)
    except ZeroDivisionError:
        s_fn = None
    return PartialDecomposition(
        r1=r1, t1=t1, r2=r2, t2=t2, s=s, f_factor=f,
        r_ob=r_ob, t_ob=t_ob, r_q=r_q, t_q=t_q, r_r=r_r, t_r=t_r,
        r1_0=r1_0, t1_0=t1_0, r1_0_ors=r1_0_ors, s_half_period=s_fn,
    )


def appendix_coefficients(w: Wavevectors, system: BarrierSystem) -> AppendixCoefficients:
    """Opaque two-barrier region coefficients, dropping third-order terms in e^{-chi a}.

    ``t`` is referenced at the exit edge, i.e. it approximates T e^{ika}.
    """
    _require_two(system)
    k, chi, period = w.k, w.chi, system.period
    f = cavity_factor(w, system.gap, 1)
    e = math.exp(-chi * system.width)
    rho = _mirror(w)
    km, kp = k - 1j * chi, k + 1j * chi
    sin_gap = math.sin(k * system.gap)
    inner = km**2 / (2.0 * chi * k) * sin_gap * f * e * e
    return AppendixCoefficients(
        r=rho * (1.0 + 2j * sin_gap * f * e * e),
        a2=(2.0 * k / km) * inner,
        b2=rho * (2.0 * k / km) * (1.0 - inner),
        a3=cmath.exp(-1j * k * period) * f * e,
        b3=rho * cmath.exp(1j * k * period) * f * e,
        a4=0j,
        b4=(2.0 * k / kp) * f * e,
        t=c0_factor(w) * f * e * e,
    )


def geometric_series_check(r1: complex, r2: complex, terms: int) -> complex:
    """Partial sum of (r1 r2)^l for l = 0 .. terms-1.

    Differs from 1/(1 - r1 r2) by at most |r1 r2|^terms / (1 - |r1 r2|).
    """
    x = r1 * r2
    if abs(x) >= 1.0:
        raise DivergentSeriesError(f"|r1 r2| = {abs(x)!r} >= 1, the series diverges")
    total, term = 0j, 1 + 0j
    for _ in range(terms):
        total += term
        term *= x
    return total


def series_error_bound(r1: complex, r2: complex, terms: int) -> float:
    x = abs(r1 * r2)
    return x**terms / (1.0 - x)
