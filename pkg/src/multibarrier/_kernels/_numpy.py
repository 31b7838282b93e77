"""Vectorized numpy implementation of the region-coefficient propagation."""
import numpy as np


def _unit(z):
    """z / |z|, with 0 for z == 0."""
    a = np.abs(z)
    return np.where(a > 0, z / np.where(a > 0, a, 1.0), 0.0)


def propagate_regions(k, chi, n, width, period):
    """Region coefficients for every frequency, outgoing amplitude fixed to 1.

    ``k`` (real) and ``chi`` (complex) have shape (m,). Returns ``(coeffs, logs)``
    with ``coeffs`` of shape (m, 2n + 1, 2) holding per-region pairs normalized
    to unit max-modulus and ``logs`` of shape (m, 2n + 1) holding the natural log
    of the dropped scale. Region 0 is the incident side, odd regions are barriers,
    even regions 2..2n-2 are gaps and region 2n is the transmitted side.
    """
    m = k.shape[0]
    ik = 1j * k
    coeffs = np.zeros((m, 2 * n + 1, 2), dtype=np.complex128)
    logs = np.zeros((m, 2 * n + 1))
    v0 = np.ones(m, dtype=np.complex128)
    v1 = np.zeros(m, dtype=np.complex128)
    g = np.zeros(m)
    coeffs[:, 2 * n, 0] = 1.0
    for r in range(2 * n - 1, -1, -1):
        if r % 2:
            ql, xl, qr, xr = chi, width, ik, width
        else:
            ql, xl, qr, xr = ik, (0.0 if r == 0 else period), chi, 0.0
        er = np.exp(qr * xr)
        psi = v0 * er + v1 / er
        dpsi = qr * (v0 * er - v1 / er)
        # c0 = u0 e^{-ql xl}, c1 = u1 e^{ql xl}; the real exponent goes into the
        # log scale so wide barriers cannot overflow
        u0 = 0.5 * (psi + dpsi / ql)
        u1 = 0.5 * (psi - dpsi / ql)
        x = ql * xl
        turn = np.exp(-1j * x.imag)
        with np.errstate(divide="ignore"):
            l0 = np.log(np.abs(u0)) - x.real
            l1 = np.log(np.abs(u1)) + x.real
        top = np.maximum(l0, l1)
        v0 = _unit(u0) * np.exp(l0 - top) * turn
        v1 = _unit(u1) * np.exp(l1 - top) / turn
        g = g + top
        coeffs[:, r, 0] = v0
        coeffs[:, r, 1] = v1
        logs[:, r] = g
    return coeffs, logs
