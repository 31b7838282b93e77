"""Phase times and the timing claims built on them.

The phase time is tau = d(phase)/d(omega) of G = T e^{ika}, the transmitted
amplitude referenced at the exit edge of the last barrier. It is taken from the
logarithmic derivative Im(G'/G), so no angle unwrapping is involved.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .dispersion import DispersionModel, dispersion_eval
from .double_barrier import decompose_exact
from .errors import AmplitudeUnderflowError, DomainError, OpaqueRegimeWarning
from .exact_solver import BarrierSystem, solve_exact, solve_scan
from .opaque_model import c0_factor, cavity_denominator, opaque_phase_rate

DEFAULT_RELATIVE_STEP = 1e-6
HARTMAN_MIN_CHI_A = 4.0
RESONANT_GATE = 0.1
UNDERFLOW = 1e-300


class DiffMethod(str, Enum):
    LOG_DERIVATIVE = "log-derivative"
    CENTRAL_DIFFERENCE = "central-difference"


@dataclass(frozen=True)
class PhaseTimeResult:
    omega: float
    phase: float
    tau: float
    method: DiffMethod


@dataclass(frozen=True)
class PhaseBudget:
    phi1: float
    phi2: float
    phi_s: float
    phi0: float
    total: float
    # arg(T e^{ika}) and the wrapped mismatch with ``total``
    phase: float
    closure_residual: float
    # opaque predictions for phi1, phi2 - kL and phi_s
    pred_phi1: float
    pred_phi2_minus_kl: float
    pred_phi_s: float
    # phi1 + phi_s, the phase for reaching the second barrier
    edge_to_edge: float
    # phi0 - phi1 and its predicted value k(L - 2a)/2
    first_barrier_shift: float
    pred_first_barrier_shift: float
    phi_q: Optional[float] = None
    phi_r: Optional[float] = None


@dataclass(frozen=True)
class TimeScan:
    """Phase times over one varied parameter."""

    points: list  # (parameter value, tau)
    spread: float
    resonant: bool = False


def wrap_angle(x):
    """Map angles to [-pi, pi)."""
    return (np.asarray(x) + math.pi) % (2 * math.pi) - math.pi


def relative_spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / abs(v.mean()))


def _admissible(model, lo_omega, hi_omega):
    v0 = model.barrier_height
    if lo_omega <= 0:
        return False
    return v0 == 0 or hi_omega < v0


def _exit_amplitude(system, model, omega, threads=1):
    scan = solve_scan(system, model, omega, threads=threads)
    return scan.T * np.exp(1j * scan.k * system.width)


def phase_time(
    system: BarrierSystem,
    model: DispersionModel,
    omega: float,
    step: Optional[float] = None,
    method: DiffMethod = DiffMethod.LOG_DERIVATIVE,
) -> PhaseTimeResult:
    """Phase time at ``omega`` from central differences with one Richardson level."""
    method = DiffMethod(method)
    h = DEFAULT_RELATIVE_STEP * omega if step is None else float(step)
    if not _admissible(model, omega - h, omega + h):
        raise DomainError(f"omega +- step = ({omega - h}, {omega + h}) leaves the admissible interval")
    offsets = np.array([-h, -h / 2, 0.0, h / 2, h])
    g = _exit_amplitude(system, model, omega + offsets)
    if abs(g[2]) < UNDERFLOW:
        raise AmplitudeUnderflowError(
            f"|T e^(ika)| = {abs(g[2]):.3e} underflows; reduce N or the barrier width"
        )
    if method is DiffMethod.LOG_DERIVATIVE:
        d1 = (g[4] - g[0]) / (2 * h)
        d2 = (g[3] - g[1]) / h
        tau = ((4 * d2 - d1) / 3 / g[2]).imag
    else:
        phi = np.unwrap(np.angle(g))
        d1 = (phi[4] - phi[0]) / (2 * h)
        d2 = (phi[3] - phi[1]) / h
        tau = (4 * d2 - d1) / 3
    return PhaseTimeResult(omega=float(omega), phase=float(np.angle(g[2])), tau=float(tau), method=method)


def phase_times(system, model, omega, step=None, threads=1):
    """Log-derivative phase times on a frequency grid (vectorized ``phase_time``).

    ``step`` is an absolute step; by default 1e-6 * omega per point.
    """
    omega = np.asarray(omega, dtype=float)
    h = DEFAULT_RELATIVE_STEP * omega if step is None else np.full_like(omega, float(step))
    if not _admissible(model, float(np.min(omega - h)), float(np.max(omega + h))):
        raise DomainError("omega +- step leaves the admissible interval")
    stencil = omega[:, None] + h[:, None] * np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    g = _exit_amplitude(system, model, stencil.ravel(), threads=threads).reshape(stencil.shape)
    if np.any(np.abs(g[:, 2]) < UNDERFLOW):
        raise AmplitudeUnderflowError("transmitted amplitude underflows on part of the grid")
    d1 = (g[:, 4] - g[:, 0]) / (2 * h)
    d2 = (g[:, 3] - g[:, 1]) / h
    return ((4 * d2 - d1) / 3 / g[:, 2]).imag


def unwrapped_phase(system, model, omega, threads=1):
    """Continuity-tracked phase of T e^{ika} along a grid, for display."""
    return np.unwrap(np.angle(_exit_amplitude(system, model, omega, threads=threads)))


def is_resonant(model: DispersionModel, omega: float, gap: float) -> bool:
    """True when |D| <= 0.1 |2 chi k|, where the independence claims do not apply."""
    w = dispersion_eval(model, omega)
    return abs(float(cavity_denominator(w.k, w.chi, gap))) <= RESONANT_GATE * 2 * w.chi * w.k


def hartman_scan(
    model: DispersionModel, omega: float, widths, opaque: bool = False, step=None
) -> TimeScan:
    """Single-barrier phase time for each width; points are (chi * a, tau).

    Widths with chi * a below 4 are still evaluated (useful as a contrast) but
    trigger an OpaqueRegimeWarning.
    """
    w = dispersion_eval(model, omega)
    points = []
    for a in widths:
        if w.chi * a < HARTMAN_MIN_CHI_A:
            warnings.warn(
                f"chi*a = {w.chi * a:.3g} < {HARTMAN_MIN_CHI_A}; the barrier is not opaque",
                OpaqueRegimeWarning,
                stacklevel=2,
            )
        if opaque:
            tau = opaque_phase_rate(w)
        else:
            system = BarrierSystem(1, a, a, model.barrier_height)
            tau = phase_time(system, model, omega, step).tau
        points.append((w.chi * a, tau))
    return TimeScan(points=points, spread=relative_spread([p[1] for p in points]))


def n_independence_scan(
    model: DispersionModel, omega: float, a: float, period: float, n_values,
    opaque: bool = False, step=None,
) -> TimeScan:
    """Phase time for each barrier count; flags the resonant regime instead of failing."""
    w = dispersion_eval(model, omega)
    points = []
    for n in n_values:
        if opaque:
            tau = opaque_phase_rate(w)
        else:
            system = BarrierSystem(n, a, period, model.barrier_height)
            tau = phase_time(system, model, omega, step).tau
        points.append((n, tau))
    return TimeScan(
        points=points,
        spread=relative_spread([p[1] for p in points]),
        resonant=is_resonant(model, omega, period - a),
    )


def phase_budget(system: BarrierSystem, model: DispersionModel, omega: float) -> PhaseBudget:
    """Split the two-barrier phase into first barrier, second barrier and multiple reflections."""
    solution = solve_exact(system, model, omega)
    dec = decompose_exact(solution, system, model)
    k, a, period = solution.k, system.width, system.period
    phi1 = cmath.phase(dec.t1 * cmath.exp(1j * k * a))
    phi2 = cmath.phase(dec.t2 * cmath.exp(1j * k * a))
    phi_s = cmath.phase(dec.s * cmath.exp(1j * k * (period - a)))
    total = phi1 + (phi2 - k * period) + phi_s
    phase = cmath.phase(solution.T * cmath.exp(1j * k * a))
    phi0 = cmath.phase(c0_factor(dispersion_eval(model, omega)))
    phi_q = cmath.phase(dec.t_q) if dec.t_q is not None else None
    phi_r = cmath.phase(dec.t_r) if dec.t_r is not None else None
    w = lambda x: float(wrap_angle(x))  # noqa: E731
    return PhaseBudget(
        phi1=phi1,
        phi2=phi2,
        phi_s=phi_s,
        phi0=phi0,
        total=total,
        phase=phase,
        closure_residual=w(total - phase),
        pred_phi1=w(phi0 - k * period / 2 + k * a),
        pred_phi2_minus_kl=w(phi0),
        pred_phi_s=w(-phi0 + k * period / 2 - k * a),
        edge_to_edge=w(phi1 + phi_s),
        first_barrier_shift=w(phi0 - phi1),
        pred_first_barrier_shift=w(k * (period - 2 * a) / 2),
        phi_q=phi_q,
        phi_r=phi_r,
    )
