import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import OMEGA, V0, rel
from oracles import denominator, opaque_phase_rate_particle, refined_roots, wrap
from multibarrier import (
    BarrierSystem,
    DispersionModel,
    NonRootWarning,
    OpaqueApproximationError,
    OpaqueRegimeWarning,
    dispersion_eval,
    find_resonances,
    opaque_phase,
    opaque_probability,
    opaque_transmission,
    resonance_time_budget,
    solve_exact,
    solve_scan,
)
from multibarrier.opaque_model import (
    antiresonance_frequencies,
    c0_factor,
    cavity_factor,
    cotangent_rate_sum,
    resonance_denominator,
)

# First resonance of (V0=10, a=4, L=7), frozen from the first validated run.
GOLDEN_BUDGET = {
    "omega": 0.7446608554668827,
    "tau": 0.3809119248299192,
    "tau0": 1.738249033562541,
    "sum": 2.11916095839246,
}


def test_single_barrier_has_no_cavity_factor(model, sym):
    for system in (BarrierSystem(1, 4.0, 4.0, V0), BarrierSystem(3, 4.0, 4.0, V0)):
        fac = opaque_transmission(system, sym)
        if system.n_barriers == 1:
            assert fac.f_factor == 1.0
            assert fac.product == pytest.approx(fac.c0 * math.exp(-sym.chi * 4.0), rel=1e-15)
    # L = a: D = 2 chi k, so F = 1 for any N
    contiguous = opaque_transmission(BarrierSystem(3, 4.0, 4.0, V0), sym)
    assert contiguous.f_factor == pytest.approx(1.0, rel=1e-15)


def test_symmetric_point_prefactor(sym):
    c0 = c0_factor(sym)
    assert c0 == pytest.approx(2.0, abs=1e-15)
    fac = opaque_transmission(BarrierSystem(2, 4.0, 10.0, V0), sym)
    assert abs(math.atan2(fac.product.imag, fac.product.real)) < 1e-15


def test_factorization_matches_exact(model, sym):
    system = BarrierSystem(2, 4.0, 7.0, V0)
    exact = solve_exact(system, model, OMEGA).T * np.exp(1j * sym.k * 4.0)
    assert rel(opaque_transmission(system, sym).product, exact) < 1e-4


def test_opaque_phase_limits(model):
    assert opaque_phase(dispersion_eval(model, OMEGA)) == pytest.approx(0.0, abs=1e-15)
    assert opaque_phase(dispersion_eval(model, V0 - 1e-12)) == pytest.approx(math.pi / 2, abs=1e-5)
    assert opaque_phase(dispersion_eval(model, 1e-12)) == pytest.approx(-math.pi / 2, abs=1e-5)


def test_probability_single_barrier(model):
    w = dispersion_eval(model, 2.0)
    a = 3.0
    expected = (4 * w.chi * w.k / (w.k**2 + w.chi**2)) ** 2 * math.exp(-2 * w.chi * a)
    assert opaque_probability(BarrierSystem(1, a, a, V0), w) == pytest.approx(expected, rel=1e-14)


def test_probability_symmetric_point(sym):
    a = 5.0 / sym.chi
    assert opaque_probability(BarrierSystem(1, a, a, V0), sym) == pytest.approx(
        4 * math.exp(-10.0), rel=1e-13
    )


def test_probability_three_barriers(model, sym):
    system = BarrierSystem(3, 4.0, 7.0, V0)
    exact = abs(solve_exact(system, model, OMEGA).T) ** 2
    assert rel(opaque_probability(system, sym), exact) < 1e-3


def test_antiresonance(model):
    system = BarrierSystem(2, 1.0, 3.0, V0)
    omegas = antiresonance_frequencies(system, model, 3)
    # nu = 0 gives k = 0 and is excluded; nu = 3 gives omega = 9 pi^2 / 4 > V0
    assert omegas == [pytest.approx(math.pi**2 / 4), pytest.approx(math.pi**2)]
    assert omegas[0] == pytest.approx(2.4674, abs=1e-4)
    w = dispersion_eval(model, omegas[0])
    assert abs(abs(cavity_factor(w, system.gap)) - 1.0) < 1e-12


def test_no_resonances_for_contiguous(model):
    report = find_resonances(BarrierSystem(2, 4.0, 4.0, V0), model, 0.1, 9.9)
    assert report.roots == [] and report.n_independence_spread == 0.0


def test_roots_against_dense_scan(model):
    system = BarrierSystem(2, 4.0, 7.0, V0)
    report = find_resonances(system, model, 0.1, 9.9, 10_000)
    expected = refined_roots(V0, 3.0, 0.1, 9.9, 1_000_000)
    assert len(report.roots) == len(expected) == 3
    assert np.allclose(report.roots, expected, rtol=0, atol=1e-9)


def test_roots_independent_of_n(model):
    roots = [
        find_resonances(BarrierSystem(n, 4.0, 7.0, V0), model, 0.1, 9.9).roots for n in (2, 3, 5)
    ]
    assert roots[0] == roots[1] == roots[2]


def test_roots_are_poles_and_satisfy_tangent_form(model):
    system = BarrierSystem(2, 4.0, 10.0, V0)
    report = find_resonances(system, model, 0.1, 9.9)
    assert len(report.roots) == 6
    for omega, d, eq in zip(report.roots, report.residuals, report.tan_product_residuals):
        w = dispersion_eval(model, omega)
        assert d < 1e-10 * 2 * w.chi * w.k
        assert abs(eq) < 1e-8
    assert report.n_independence_spread == 0.0


def test_exact_peaks_sit_on_roots(model):
    system = BarrierSystem(2, 4.0, 10.0, V0)
    grid = np.linspace(0.1, 9.9, 10_000)
    p = np.abs(solve_scan(system, model, grid).T) ** 2
    peaks = grid[1:-1][(p[1:-1] > p[:-2]) & (p[1:-1] > p[2:])]
    step = grid[1] - grid[0]
    for root in find_resonances(system, model, 0.1, 9.9).roots:
        if dispersion_eval(model, root).chi * 4.0 >= 5.0:
            assert np.min(np.abs(peaks - root)) <= step


def test_guard_refuses_resonance(model):
    system = BarrierSystem(2, 4.0, 7.0, V0)
    root = find_resonances(system, model, 0.1, 9.9).roots[0]
    with pytest.raises(OpaqueApproximationError, match="near resonance") as info:
        opaque_transmission(system, dispersion_eval(model, root))
    assert abs(info.value.denominator) < 1e-8 * 2 * math.sqrt(root * (V0 - root))


def test_thin_barrier_warns(model):
    w = dispersion_eval(model, 9.0)
    with pytest.warns(OpaqueRegimeWarning):
        opaque_transmission(BarrierSystem(1, 0.5, 0.5, V0), w)


def test_window_outside_interval(model):
    with pytest.raises(ValueError):
        find_resonances(BarrierSystem(2, 4.0, 7.0, V0), model, 0.0, 9.9)


def test_resonance_time_budget_golden(model):
    system = BarrierSystem(2, 4.0, 7.0, V0)
    root = find_resonances(system, model, 0.1, 9.9).roots[0]
    assert root == pytest.approx(GOLDEN_BUDGET["omega"], rel=1e-12)
    b = resonance_time_budget(system, model, root)
    assert b.tau == pytest.approx(GOLDEN_BUDGET["tau"], rel=1e-12)
    assert b.tau0 == pytest.approx(GOLDEN_BUDGET["tau0"], rel=1e-12)
    assert b.sum == pytest.approx(GOLDEN_BUDGET["sum"], rel=1e-12)
    # the analytic rate agrees with the hand-derived oracle
    assert b.tau == pytest.approx(opaque_phase_rate_particle(root, V0), rel=1e-12)
    assert b.tau0 == pytest.approx(3.0 / (2 * math.sqrt(root)), rel=1e-14)


def test_budget_warns_off_root(model):
    with pytest.warns(NonRootWarning):
        b = resonance_time_budget(BarrierSystem(2, 4.0, 7.0, V0), model, 1.3)
    assert b.tau0 > 0 and b.tau > 0


@given(theta_shift=st.floats(0.1, 1.2), omega=st.floats(0.5, 1.5))
def test_conditional_identity_synthetic_family(theta_shift, omega):
    def phase(w):
        return theta_shift * 0.3 + 0.4 * math.sin(w)

    def cavity(w):
        return math.pi / 2 - phase(w)

    residual, rate = cotangent_rate_sum(phase, cavity, omega)
    assert abs(residual) < 1e-8
    assert abs(rate) < 1e-8


def test_particle_dispersion_budget_does_not_vanish(model):
    system = BarrierSystem(2, 4.0, 10.0, V0)
    for root in find_resonances(system, model, 0.1, 9.9).roots:
        b = resonance_time_budget(system, model, root)
        assert b.tau > 0 and b.tau0 > 0 and b.sum > 0


# -- properties -------------------------------------------------------------

geometries = st.tuples(
    st.integers(1, 6), st.floats(2.0, 8.0), st.floats(0.0, 10.0), st.floats(0.05, 0.95)
)


@settings(max_examples=200)
@given(geometries)
def test_phase_is_structure_independent(geo):
    n, a, gap, frac = geo
    model = DispersionModel(V0)
    w = dispersion_eval(model, frac * V0)
    system = BarrierSystem(n, a, a + gap, V0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OpaqueRegimeWarning)
            fac = opaque_transmission(system, w)
            prob = opaque_probability(system, w)
    except OpaqueApproximationError:
        return
    if fac.product == 0:
        return
    mismatch = wrap(math.atan2(fac.product.imag, fac.product.real) - opaque_phase(w))
    assert min(abs(mismatch), abs(abs(mismatch) - math.pi)) < 1e-12
    assert fac.product == fac.c0 * fac.e_factor * fac.f_factor
    assert prob == pytest.approx(abs(fac.product) ** 2, rel=1e-12)


@given(st.floats(0.05, 9.95), st.floats(0.0, 10.0))
def test_denominator_matches_oracle(omega, gap):
    model = DispersionModel(V0)
    system = BarrierSystem(2, 1.0, 1.0 + gap, V0)
    assert float(resonance_denominator(system, model, omega)) == pytest.approx(
        denominator(omega, V0, gap), rel=1e-12, abs=1e-12
    )
