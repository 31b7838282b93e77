"""Numba implementation of the region-coefficient propagation.

Same contract as the numpy version; loops over frequencies so every
intermediate stays scalar.
"""
import cmath
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def propagate_regions(k, chi, n, width, period):
    m = k.shape[0]
    coeffs = np.zeros((m, 2 * n + 1, 2), dtype=np.complex128)
    logs = np.zeros((m, 2 * n + 1))
    for j in range(m):
        ik = 1j * k[j]
        v0 = 1.0 + 0j
        v1 = 0.0 + 0j
        g = 0.0
        coeffs[j, 2 * n, 0] = 1.0
        for r in range(2 * n - 1, -1, -1):
            if r % 2 == 1:
                ql = chi[j]
                xl = width
                qr = ik
                xr = width
            else:
                ql = ik
                xl = 0.0 if r == 0 else period
                qr = chi[j]
                xr = 0.0
            er = cmath.exp(qr * xr)
            psi = v0 * er + v1 / er
            dpsi = qr * (v0 * er - v1 / er)
            u0 = 0.5 * (psi + dpsi / ql)
            u1 = 0.5 * (psi - dpsi / ql)
            x = ql * xl
            turn = cmath.exp(-1j * x.imag)
            a0 = abs(u0)
            a1 = abs(u1)
            l0 = math.log(a0) - x.real if a0 > 0.0 else -math.inf
            l1 = math.log(a1) + x.real if a1 > 0.0 else -math.inf
            top = max(l0, l1)
            v0 = (u0 / a0) * math.exp(l0 - top) * turn if a0 > 0.0 else 0j
            v1 = (u1 / a1) * math.exp(l1 - top) / turn if a1 > 0.0 else 0j
            g += top
            coeffs[j, r, 0] = v0
            coeffs[j, r, 1] = v1
            logs[j, r] = g
    return coeffs, logs
