"""Reference computations that share no code with the package.

``mp_solve`` assembles the 4N matching equations in arbitrary precision with
mpmath, so exponential growth inside wide barriers cannot hide rounding
problems. The closed forms below are written out from scratch.
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np


def mp_solve(n, a, period, v0, omega, dps=80):
    """All 4N coefficients (R, A2, B2, ..., T) as complex doubles."""
    with mp.workdps(dps):
        a, period, v0, omega = (mp.mpf(v) for v in (a, period, v0, omega))
        k = mp.sqrt(omega)
        q_bar = mp.sqrt(mp.mpc(v0 - omega))  # real below the barrier top
        ik = mp.mpc(0, 1) * k
        size = 4 * n
        mat = mp.zeros(size, size)
        rhs = mp.zeros(size, 1)

        # column layout: 0 = R, then per barrier (A, B), per gap (A, B), last = T
        def barrier_cols(i):
            return 1 + 4 * (i - 1), 2 + 4 * (i - 1)

        def gap_cols(i):
            return 3 + 4 * (i - 1), 4 + 4 * (i - 1)

        row = 0
        for i in range(1, n + 1):
            origin = (i - 1) * period
            left_edge, right_edge = origin, origin + a
            ca, cb = barrier_cols(i)
            # left face of barrier i
            eb_plus = mp.exp(q_bar * (left_edge - origin))
            eb_minus = 1 / eb_plus
            if i == 1:
                e = mp.exp(ik * left_edge)
                rhs[row] = e
                rhs[row + 1] = ik * e
                mat[row, 0] = -1 / e
                mat[row + 1, 0] = ik / e
            else:
                ga, gb = gap_cols(i - 1)
                g_origin = (i - 2) * period
                e = mp.exp(ik * (left_edge - g_origin))
                mat[row, ga] = -e
                mat[row, gb] = -1 / e
                mat[row + 1, ga] = -ik * e
                mat[row + 1, gb] = ik / e
            mat[row, ca] = eb_plus
            mat[row, cb] = eb_minus
            mat[row + 1, ca] = q_bar * eb_plus
            mat[row + 1, cb] = -q_bar * eb_minus
            row += 2
            # right face of barrier i
            eb_plus = mp.exp(q_bar * (right_edge - origin))
            eb_minus = 1 / eb_plus
            mat[row, ca] = eb_plus
            mat[row, cb] = eb_minus
            mat[row + 1, ca] = q_bar * eb_plus
            mat[row + 1, cb] = -q_bar * eb_minus
            if i == n:
                e = mp.exp(ik * (right_edge - (n - 1) * period))
                mat[row, size - 1] = -e
                mat[row + 1, size - 1] = -ik * e
            else:
                ga, gb = gap_cols(i)
                e = mp.exp(ik * (right_edge - origin))
                mat[row, ga] = -e
                mat[row, gb] = -1 / e
                mat[row + 1, ga] = -ik * e
                mat[row + 1, gb] = ik / e
            row += 2
        sol = mp.lu_solve(mat, rhs)
        return np.array([complex(sol[j]) for j in range(size)])


def single_barrier_probability(k, chi, a):
    """Textbook |T|^2 of one rectangular barrier below its top."""
    s = math.sinh(chi * a)
    return 1.0 / (1.0 + ((k * k + chi * chi) ** 2) * s * s / (2.0 * k * chi) ** 2)


def opaque_phase_rate_particle(omega, v0):
    """d/d(omega) of atan((k^2 - chi^2) / (2 chi k)) with k = sqrt(w), chi = sqrt(V0 - w).

    Differentiated by hand: the argument is u = (2w - V0) / (2 sqrt(w (V0 - w))),
    and atan(u)' = u' / (1 + u^2) simplifies to 1 / sqrt(w (V0 - w)).
    """
    return 1.0 / math.sqrt(omega * (v0 - omega))


def denominator(omega, v0, gap):
    k, chi = math.sqrt(omega), math.sqrt(v0 - omega)
    return 2 * chi * k * math.cos(k * gap) - (k * k - chi * chi) * math.sin(k * gap)


def refined_roots(v0, gap, lo, hi, points):
    """Sign changes of the cavity denominator on a dense grid, polished by plain bisection."""
    grid = np.linspace(lo, hi, points)
    k, chi = np.sqrt(grid), np.sqrt(v0 - grid)
    d = 2 * chi * k * np.cos(k * gap) - (k * k - chi * chi) * np.sin(k * gap)
    roots = []
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]:
        x0, x1 = float(grid[i]), float(grid[i + 1])
        f0 = denominator(x0, v0, gap)
        for _ in range(200):
            mid = 0.5 * (x0 + x1)
            fm = denominator(mid, v0, gap)
            if fm == 0 or x1 - x0 < 1e-15 * mid:
                break
            if (fm > 0) == (f0 > 0):
                x0, f0 = mid, fm
            else:
                x1 = mid
        roots.append(0.5 * (x0 + x1))
    return roots


def wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi
