"""Exact scattering through N identical, equally spaced rectangular barriers.

Region layout and phase references::

    x < 0                      e^{ikx} + R e^{-ikx}
    barrier i  [(i-1)L, (i-1)L + a]   A e^{chi (x-(i-1)L)} + B e^{-chi (x-(i-1)L)}
    gap i      ((i-1)L + a, iL)       A e^{ik (x-(i-1)L)} + B e^{-ik (x-(i-1)L)}
    x > (N-1)L + a             T e^{ik (x-(N-1)L)}

``solve_exact`` propagates 2x2 interface transfer matrices from the
transmitted side back to the incident side. ``brute_force_solve`` assembles and
solves the full 4N x 4N matching system and exists as an independent oracle.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dispersion import DispersionModel
from .errors import ConditioningWarning, DomainError, SingularSystemError

CONDITION_WARN_NORM = 1e12


@dataclass(frozen=True)
class BarrierSystem:
    """N barriers of width ``width`` and height ``height``, repeated every ``period``.

    ``period == width`` means contiguous barriers. A zero height is accepted and
    describes free propagation.
    """

    n_barriers: int
    width: float
    period: float
    height: float

    def __post_init__(self):
        if isinstance(self.n_barriers, bool) or int(self.n_barriers) != self.n_barriers:
            raise DomainError(f"n_barriers must be an integer, got {self.n_barriers!r}")
        n = int(self.n_barriers)
        if n < 1:
            raise DomainError(f"n_barriers must be >= 1, got {n}")
        a, period, v0 = float(self.width), float(self.period), float(self.height)
        if not (math.isfinite(a) and a > 0):
            raise DomainError(f"width must be > 0, got {a!r}")
        if not (math.isfinite(period) and period >= a):
            raise DomainError(f"period must satisfy L >= a (L={period!r}, a={a!r})")
        if not (math.isfinite(v0) and v0 >= 0):
            raise DomainError(f"height must be >= 0, got {v0!r}")
        object.__setattr__(self, "n_barriers", n)
        object.__setattr__(self, "width", a)
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "height", v0)

    @property
    def gap(self) -> float:
        return self.period - self.width

    @property
    def length(self) -> float:
        return (self.n_barriers - 1) * self.period + self.width

    def interfaces(self) -> np.ndarray:
        """The 2N matching points, in increasing order."""
        starts = np.arange(self.n_barriers) * self.period
        return np.column_stack([starts, starts + self.width]).ravel()

    def with_n(self, n_barriers: int) -> BarrierSystem:
        return BarrierSystem(n_barriers, self.width, self.period, self.height)


@dataclass(frozen=True)
class ScatteringSolution:
    omega: float
    k: float
    chi: complex
    R: complex
    T: complex
    barrier_coeffs: np.ndarray  # (N, 2): (A_{2i}, B_{2i})
    gap_coeffs: np.ndarray  # (N-1, 2): (A_{2i+1}, B_{2i+1})

    @property
    def n_barriers(self) -> int:
        return self.barrier_coeffs.shape[0]

    def coefficients(self) -> np.ndarray:
        """All 4N unknowns in matching order: R, A2, B2, A3, B3, ..., A2N, B2N, T."""
        parts = [np.array([self.R])]
        for i in range(self.n_barriers):
            parts.append(self.barrier_coeffs[i])
            if i < self.n_barriers - 1:
                parts.append(self.gap_coeffs[i])
        parts.append(np.array([self.T]))
        return np.concatenate(parts)


@dataclass(frozen=True)
class ScatteringScan:
    """Exact solutions on a frequency grid, stored as arrays."""

    omega: np.ndarray
    k: np.ndarray
    chi: np.ndarray
    R: np.ndarray
    T: np.ndarray
    barrier_coeffs: np.ndarray  # (m, N, 2)
    gap_coeffs: np.ndarray  # (m, N-1, 2)

    def __len__(self):
        return self.omega.shape[0]

    def solution(self, i: int) -> ScatteringSolution:
        return ScatteringSolution(
            omega=float(self.omega[i]),
            k=float(self.k[i]),
            chi=complex(self.chi[i]),
            R=complex(self.R[i]),
            T=complex(self.T[i]),
            barrier_coeffs=self.barrier_coeffs[i].copy(),
            gap_coeffs=self.gap_coeffs[i].copy(),
        )


def _check_pair(system: BarrierSystem, model: DispersionModel):
    if system.height != model.barrier_height:
        raise DomainError(
            f"system height {system.height} does not match model barrier_height "
            f"{model.barrier_height}"
        )


def _wavevector_arrays(system, model, omega):
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.ndim != 1:
        raise DomainError("omega must be a scalar or a 1-d array")
    if not np.all(np.isfinite(omega)) or np.any(omega <= 0):
        raise DomainError("omega must be finite and > 0 (k = 0 makes the interfaces singular)")
    _check_pair(system, model)
    k = np.asarray(model.free_wavenumber(omega), dtype=float)
    chi = np.asarray(model.barrier_rate(omega), dtype=complex)
    if np.any(chi == 0):
        bad = omega[chi == 0][0]
        raise DomainError(
            f"omega={bad!r} sits exactly on the barrier top (chi = 0); the interface "
            "matrix is singular there"
        )
    log_norm = np.abs(chi.real) * system.width
    if np.any(log_norm > math.log(CONDITION_WARN_NORM)):
        warnings.warn(
            f"barrier translation matrix norm e^{log_norm.max():.4g} exceeds "
            f"{CONDITION_WARN_NORM:.0e}; dense-oracle cross-checks are advised",
            ConditioningWarning,
            stacklevel=3,
        )
    return omega, k, chi


def _run_kernel(k, chi, system, threads):
    n, a, period = system.n_barriers, system.width, system.period
    m = k.shape[0]
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads <= 1 or m < 2 * threads:
        return _kernels.propagate_regions(k, chi, n, a, period)
    chunks = np.array_split(np.arange(m), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(
            pool.map(
                lambda idx: _kernels.propagate_regions(k[idx], chi[idx], n, a, period),
                chunks,
            )
        )
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
    )


def solve_scan(
    system: BarrierSystem, model: DispersionModel, omega, threads: int = 1
) -> ScatteringScan:
    """Exact solutions for every frequency in ``omega``.

    ``threads`` > 1 splits the grid into chunks solved concurrently (0 uses one
    thread per CPU); results are reassembled in input order.
    """
    omega, k, chi = _wavevector_arrays(system, model, omega)
    coeffs, logs = _run_kernel(k, chi, system, threads)
    incident = coeffs[:, 0, 0]
    scale = np.exp(logs - logs[:, :1]) / incident[:, None]
    regions = coeffs * scale[:, :, None]
    n = system.n_barriers
    return ScatteringScan(
        omega=omega,
        k=k,
        chi=chi,
        R=regions[:, 0, 1].copy(),
        T=regions[:, 2 * n, 0].copy(),
        barrier_coeffs=regions[:, 1 : 2 * n : 2, :].copy(),
        gap_coeffs=regions[:, 2 : 2 * n - 1 : 2, :].copy(),
    )


def solve_exact(
    system: BarrierSystem, model: DispersionModel, omega: float
) -> ScatteringSolution:
    """Exact R, T and region coefficients at a single frequency."""
    return solve_scan(system, model, [omega]).solution(0)


def transmission(system: BarrierSystem, model: DispersionModel, omega, threads: int = 1):
    """Complex transmission amplitudes on a frequency grid."""
    return solve_scan(system, model, omega, threads=threads).T


# -- dense oracle -----------------------------------------------------------

SINGULAR_CONDITION = 1e13


def brute_force_solve(
    system: BarrierSystem, model: DispersionModel, omega: float
) -> ScatteringSolution:
    """Solve all 4N matching conditions as one dense linear system.

    Unknowns are ordered R, A2, B2, A3, B3, ..., A2N, B2N, T. The growing
    exponential coefficient of every barrier is solved for in units of
    e^{-chi a}, which equilibrates the columns; without it the matrix carries
    entries spanning e^{+-chi a} and loses the small coefficients.
    """
    omega_arr, k_arr, chi_arr = _wavevector_arrays(system, model, [omega])
    k, chi = float(k_arr[0]), complex(chi_arr[0])
    n, a, period = system.n_barriers, system.width, system.period
    ik = 1j * k
    size = 4 * n
    m = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    shrink = np.exp(-chi * a) if chi.real > 0 else 1.0

    def barrier_col(i):
        return 1 + 4 * (i - 1)

    def gap_col(i):
        return 3 + 4 * (i - 1)

    row = 0
    for i in range(1, n + 1):
        cb = barrier_col(i)
        # left edge x = (i-1)L, barrier-local coordinate 0
        m[row, cb], m[row, cb + 1] = shrink, 1.0
        m[row + 1, cb], m[row + 1, cb + 1] = chi * shrink, -chi
        if i == 1:
            m[row, 0] = -1.0
            m[row + 1, 0] = ik
            rhs[row], rhs[row + 1] = 1.0, ik
        else:
            cg = gap_col(i - 1)
            e_p, e_m = np.exp(ik * period), np.exp(-ik * period)
            m[row, cg], m[row, cg + 1] = -e_p, -e_m
            m[row + 1, cg], m[row + 1, cg + 1] = -ik * e_p, ik * e_m
        row += 2
        # right edge x = (i-1)L + a
        grow = np.exp(chi * a) * shrink
        decay = np.exp(-chi * a)
        m[row, cb], m[row, cb + 1] = grow, decay
        m[row + 1, cb], m[row + 1, cb + 1] = chi * grow, -chi * decay
        e_p, e_m = np.exp(ik * a), np.exp(-ik * a)
        if i == n:
            m[row, size - 1] = -e_p
            m[row + 1, size - 1] = -ik * e_p
        else:
            cg = gap_col(i)
            m[row, cg], m[row, cg + 1] = -e_p, -e_m
            m[row + 1, cg], m[row + 1, cg + 1] = -ik * e_p, ik * e_m
        row += 2

    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SingularSystemError(
            f"dense matching system is numerically singular (condition {cond:.3g})",
            condition=cond,
        )
    x = np.linalg.solve(m, rhs)
    for i in range(1, n + 1):
        x[barrier_col(i)] *= shrink
    barrier = np.array([x[barrier_col(i) : barrier_col(i) + 2] for i in range(1, n + 1)])
    gaps = np.array(
        [x[gap_col(i) : gap_col(i) + 2] for i in range(1, n)], dtype=complex
    ).reshape(n - 1, 2)
    return ScatteringSolution(
        omega=float(omega_arr[0]),
        k=k,
        chi=chi,
        R=complex(x[0]),
        T=complex(x[-1]),
        barrier_coeffs=barrier,
        gap_coeffs=gaps,
    )


# -- wavefunction -----------------------------------------------------------


def _locate(system, x):
    """Region code per point: -1 incident, 2i-1 barrier i, 2i gap i, 2N transmitted."""
    n, a, period = system.n_barriers, system.width, system.period
    x = np.asarray(x, dtype=float)
    idx = np.clip(np.floor(x / period), 0, n - 1).astype(int)
    local = x - idx * period
    region = np.where(local <= a, 2 * idx + 1, 2 * idx + 2)
    region = np.where(x < 0, -1, region)
    region = np.where(x > system.length, 2 * n, region)
    return region


def _branch(solution, system, region, x):
    """psi and psi' of one region's analytic form at ``x`` (any x, no clipping)."""
    x = np.asarray(x, dtype=float)
    ik = 1j * solution.k
    n = system.n_barriers
    if region == -1 or region == 0:
        e = np.exp(ik * x)
        return e + solution.R / e, ik * (e - solution.R / e)
    if region == 2 * n:
        e = np.exp(ik * (x - (n - 1) * system.period))
        return solution.T * e, ik * solution.T * e
    if region % 2:
        i = (region + 1) // 2
        q = solution.chi
        a_c, b_c = solution.barrier_coeffs[i - 1]
    else:
        i = region // 2
        q = ik
        a_c, b_c = solution.gap_coeffs[i - 1]
    e = np.exp(q * (x - (i - 1) * system.period))
    return a_c * e + b_c / e, q * (a_c * e - b_c / e)


def evaluate_wavefunction(
    solution: ScatteringSolution, system: BarrierSystem, model: DispersionModel, x
):
    """Piecewise stationary wavefunction at ``x`` (scalar or array)."""
    _check_pair(system, model)
    xs = np.asarray(x, dtype=float)
    regions = _locate(system, xs)
    out = np.empty(xs.shape, dtype=complex)
    for region in np.unique(regions):
        mask = regions == region
        out[mask] = _branch(solution, system, int(region), xs[mask])[0]
    return complex(out) if out.ndim == 0 else out


def interface_residuals(solution: ScatteringSolution, system: BarrierSystem) -> np.ndarray:
    """Relative mismatch of (psi, psi') across each of the 2N interfaces.

    Returns shape (2N, 2). The derivative mismatch is scaled by k so both
    columns are dimensionless.
    """
    k = solution.k
    out = np.empty((2 * system.n_barriers, 2))
    for j, x in enumerate(system.interfaces()):
        left, right = j, j + 1  # region codes 0..2N on either side
        pl, dl = _branch(solution, system, left, x)
        pr, dr = _branch(solution, system, right, x)
        scale = max(abs(pl), abs(pr), abs(dl) / k, abs(dr) / k, np.finfo(float).tiny)
        out[j] = abs(pl - pr) / scale, abs(dl - dr) / (k * scale)
    return out


def unitarity_defect(solution) -> float:
    """|R|^2 + |T|^2 - 1; accepts a single solution or a scan (returns an array)."""
    return np.abs(solution.R) ** 2 + np.abs(solution.T) ** 2 - 1.0
