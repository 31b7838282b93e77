"""Closed forms valid for opaque barriers (chi * a >> 1).

The transmitted amplitude factorizes as

    T(N) e^{ika} = C0 * E(N) * F(N)
    C0 = 4 i chi k / (k + i chi)^2
    E  = exp(-N chi a)
    F  = [2 chi k / D]^(N-1),  D = 2 chi k cos k(L-a) - (k^2 - chi^2) sin k(L-a)

Only C0 is complex, so the phase of the transmitted amplitude does not depend
on a, L or N. Resonances are the zeros of D, which does not contain N.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import bisect

from .dispersion import DispersionModel, Wavevectors, dispersion_eval
from .errors import DomainError, NonRootWarning, OpaqueApproximationError, OpaqueRegimeWarning
from .exact_solver import BarrierSystem

RESONANCE_GUARD = 1e-8
OPAQUE_WARN_CHI_A = 1.0


@dataclass(frozen=True)
class OpaqueFactorization:
    c0: complex
    e_factor: float
    f_factor: float
    product: complex


@dataclass(frozen=True)
class ResonanceReport:
    roots: list
    residuals: list  # |D| at each root
    tan_product_residuals: list  # tan(phi) * tan(k(L-a)) - 1 at each root
    n_independence_spread: float


class ResonanceTimeBudget(NamedTuple):
    tau: float
    tau0: float
    sum: float


def cavity_denominator(k, chi, gap):
    """D = 2 chi k cos(k gap) - (k^2 - chi^2) sin(k gap); works on arrays."""
    kg = k * gap
    return 2.0 * chi * k * np.cos(kg) - (k * k - chi * chi) * np.sin(kg)


def resonance_denominator(system: BarrierSystem, model: DispersionModel, omega):
    """D(omega) for the system's inter-barrier gap, on scalars or arrays."""
    k = model.free_wavenumber(omega)
    chi = np.real(model.barrier_rate(omega))
    return cavity_denominator(k, chi, system.gap)


def c0_factor(w: Wavevectors) -> complex:
    k, chi = w.k, w.chi
    return 4j * chi * k / (k + 1j * chi) ** 2


def cavity_factor(w: Wavevectors, gap: float, power: int = 1) -> float:
    """F = (2 chi k / D)^power, refusing frequencies where D is near zero."""
    if power == 0:
        return 1.0
    scale = 2.0 * w.chi * w.k
    d = float(cavity_denominator(w.k, w.chi, gap))
    if abs(d) < RESONANCE_GUARD * scale:
        raise OpaqueApproximationError(
            f"opaque approximation invalid near resonance (D = {d:.3e})", denominator=d
        )
    return (scale / d) ** power


def _warn_thin(system, w):
    if w.chi * system.width < OPAQUE_WARN_CHI_A:
        warnings.warn(
            f"chi*a = {w.chi * system.width:.3g} < {OPAQUE_WARN_CHI_A}; "
            "opaque formulas are unreliable for thin barriers",
            OpaqueRegimeWarning,
            stacklevel=3,
        )


def opaque_transmission(system: BarrierSystem, w: Wavevectors) -> OpaqueFactorization:
    _warn_thin(system, w)
    c0 = c0_factor(w)
    e = math.exp(-w.chi * system.width) ** system.n_barriers
    f = cavity_factor(w, system.gap, system.n_barriers - 1)
    return OpaqueFactorization(c0=c0, e_factor=e, f_factor=f, product=c0 * e * f)


def opaque_phase(w: Wavevectors) -> float:
    """Phase of T e^{ika} for opaque barriers, in (-pi/2, pi/2)."""
    return math.atan((w.k**2 - w.chi**2) / (2.0 * w.chi * w.k))


def opaque_phase_rate(w: Wavevectors) -> float:
    """Analytic d(phase)/d(omega) of the opaque phase; 1/(k chi) for particles."""
    return 2.0 * (w.dk_domega * w.chi - w.k * w.dchi_domega) / (w.k**2 + w.chi**2)


def opaque_probability(system: BarrierSystem, w: Wavevectors) -> float:
    """|T(N)|^2 from the squared real factors, computed independently of the product."""
    _warn_thin(system, w)
    k, chi, n = w.k, w.chi, system.n_barriers
    prefactor = (4.0 * chi * k / (k * k + chi * chi)) ** 2
    decay = math.exp(-chi * system.width) ** (2 * n)
    cavity = cavity_factor(w, system.gap, 1) ** (2 * (n - 1)) if n > 1 else 1.0
    return prefactor * decay * cavity


def antiresonance_frequencies(
    system: BarrierSystem, model: DispersionModel, nu_max: int
) -> list:
    """Frequencies with k(L-a) = nu*pi inside the tunneling interval (nu >= 1).

    There |F| = 1, so the cavity cannot build up a resonance. nu = 0 gives k = 0,
    which is outside the admissible interval.
    """
    gap = system.gap
    if gap <= 0:
        raise DomainError("anti-resonances need separated barriers (L > a)")
    lo, hi = model.tunneling_interval
    out = []
    for nu in range(1, nu_max + 1):
        omega = float(model.omega_of_k(nu * math.pi / gap))
        if lo < omega < hi:
            out.append(omega)
    return out


def _resonance_roots(system, model, omega_lo, omega_hi, grid_points):
    lo, hi = model.tunneling_interval
    if not (lo < omega_lo < omega_hi < hi):
        raise DomainError(
            f"search window ({omega_lo}, {omega_hi}) must lie inside ({lo}, {hi})"
        )
    if system.gap <= 0:
        return []
    grid = np.linspace(omega_lo, omega_hi, int(grid_points))
    d = resonance_denominator(system, model, grid)

    def f(omega):
        return float(resonance_denominator(system, model, omega))

    roots = []
    for i in range(len(grid) - 1):
        if d[i] == 0.0:
            roots.append(float(grid[i]))
        elif d[i] * d[i + 1] < 0.0:
            roots.append(bisect(f, grid[i], grid[i + 1], xtol=1e-300, rtol=1e-12, maxiter=200))
    if d[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def find_resonances(
    system: BarrierSystem,
    model: DispersionModel,
    omega_lo: float,
    omega_hi: float,
    grid_points: int = 10_000,
    compare_n: Sequence[int] = (2, 3, 5),
) -> ResonanceReport:
    """Resonant frequencies: sign changes of D on a grid, refined by bisection.

    Two roots closer than one grid step can be missed; choosing the grid is the
    caller's job. The search is repeated for each N in ``compare_n`` and the
    largest root displacement is reported as ``n_independence_spread``.
    """
    roots = _resonance_roots(system, model, omega_lo, omega_hi, grid_points)
    residuals, tan_product = [], []
    for r in roots:
        w = dispersion_eval(model, r)
        residuals.append(abs(float(cavity_denominator(w.k, w.chi, system.gap))))
        tan_product.append(math.tan(opaque_phase(w)) * math.tan(w.k * system.gap) - 1.0)

    spread = 0.0
    others = [
        _resonance_roots(system.with_n(n), model, omega_lo, omega_hi, grid_points)
        for n in compare_n
    ]
    for i, first in enumerate(others):
        for second in others[i + 1 :]:
            if len(first) != len(second):
                spread = math.inf
            elif first:
                spread = max(spread, float(np.max(np.abs(np.subtract(first, second)))))
    return ResonanceReport(
        roots=roots, residuals=residuals, tan_product_residuals=tan_product, n_independence_spread=spread
    )


def resonance_time_budget(
    system: BarrierSystem, model: DispersionModel, omega_res: float
) -> ResonanceTimeBudget:
    """Opaque phase time and free-flight time over the gap at a resonance.

    The sum is a diagnostic only. With a concrete dispersion both terms are
    positive, so it does not vanish at an isolated root.
    """
    w = dispersion_eval(model, omega_res)
    d = float(cavity_denominator(w.k, w.chi, system.gap))
    if abs(d) > RESONANCE_GUARD * 2.0 * w.chi * w.k:
        warnings.warn(
            f"omega={omega_res!r} is not a resonance root (|D| = {abs(d):.3e})",
            NonRootWarning,
            stacklevel=2,
        )
    tau = opaque_phase_rate(w)
    tau0 = system.gap * w.dk_domega
    return ResonanceTimeBudget(tau=tau, tau0=tau0, sum=tau + tau0)


def cotangent_rate_sum(
    phase: Callable[[float], float],
    cavity_phase: Callable[[float], float],
    omega: float,
    step: float = 1e-5,
) -> tuple[float, float]:
    """Check d(phase)/dw + d(cavity_phase)/dw = 0 when tan(phase) tan(cavity_phase) = 1.

    Returns ``(constraint_residual, rate_sum)`` at ``omega`` using central
    differences. The rate sum vanishes only when the constraint holds on a whole
    neighbourhood of ``omega``, not at an isolated crossing.
    """
    residual = math.tan(phase(omega)) * math.tan(cavity_phase(omega)) - 1.0
    rate = (
        phase(omega + step) - phase(omega - step)
        + cavity_phase(omega + step) - cavity_phase(omega - step)
    ) / (2.0 * step)
    return residual, rate
