import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import OMEGA, V0, rel
from oracles import mp_solve, single_barrier_probability
from multibarrier import (
    BarrierSystem,
    ConditioningWarning,
    DispersionModel,
    DomainError,
    brute_force_solve,
    dispersion_eval,
    evaluate_wavefunction,
    interface_residuals,
    solve_exact,
    solve_scan,
    transmission,
    unitarity_defect,
)
from multibarrier.opaque_model import opaque_transmission


def natural_scale_error(x, y, system, chi):
    """Coefficient mismatch measured against the wavefunction it produces.

    A growing-exponential coefficient can be far below rounding of the
    solution it belongs to (contiguous stacks), so each barrier pair is
    compared at the edge where that term is largest.
    """
    grow = math.exp(abs(chi.real) * system.width)
    worst = abs(x[0] - y[0]) / abs(y[0]) if abs(y[0]) > 0 else abs(x[0])
    worst = max(worst, abs(x[-1] - y[-1]) / abs(y[-1]))
    for i in range(system.n_barriers):
        ja, jb = 1 + 4 * i, 2 + 4 * i
        size_right = abs(y[ja]) * grow + abs(y[jb]) / grow
        size_left = abs(y[ja]) + abs(y[jb])
        worst = max(worst, abs(x[ja] - y[ja]) * grow / size_right, abs(x[jb] - y[jb]) / size_left)
        if i < system.n_barriers - 1:
            g = x[3 + 4 * i : 5 + 4 * i] - y[3 + 4 * i : 5 + 4 * i]
            worst = max(worst, float(np.max(np.abs(g))) / float(np.max(np.abs(y[3 + 4 * i : 5 + 4 * i]))))
    return worst


# -- documented examples ----------------------------------------------------


def test_free_propagation_is_transparent():
    free = DispersionModel(0.0)
    sol = solve_exact(BarrierSystem(1, 3.0, 3.0, 0.0), free, 2.0)
    assert abs(sol.T) == pytest.approx(1.0, abs=1e-14)
    assert abs(sol.R) < 1e-14
    assert abs(unitarity_defect(sol)) < 1e-14


def test_single_barrier_textbook(model, sym):
    sol = solve_exact(BarrierSystem(1, 2.0, 2.0, V0), model, OMEGA)
    expected = single_barrier_probability(sym.k, sym.chi, 2.0)
    assert rel(abs(sol.T) ** 2, expected) < 1e-12


def test_two_barriers_against_dense_solves(model):
    system = BarrierSystem(2, 1.0, 3.0, V0)
    sol = solve_exact(system, model, OMEGA)
    dense = brute_force_solve(system, model, OMEGA)
    reference = mp_solve(2, 1.0, 3.0, V0, OMEGA)
    for got in (sol.coefficients(), dense.coefficients()):
        assert np.all(np.abs(got - reference) <= 1e-10 * np.abs(reference))


def test_single_barrier_oracle_agreement(model):
    system = BarrierSystem(1, 1.0, 1.0, V0)
    x = solve_exact(system, model, OMEGA).coefficients()
    y = brute_force_solve(system, model, OMEGA).coefficients()
    assert np.all(np.abs(x - y) <= 1e-10 * np.abs(y))


def test_dense_three_barrier_unitarity(model):
    sol = brute_force_solve(BarrierSystem(3, 1.0, 4.0, V0), model, OMEGA)
    assert abs(unitarity_defect(sol)) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4])
def test_contiguous_barriers_merge(model, sym, n):
    t_n = solve_exact(BarrierSystem(n, 1.0, 1.0, V0), model, OMEGA).T
    t_1 = solve_exact(BarrierSystem(1, n * 1.0, n * 1.0, V0), model, OMEGA).T
    assert rel(t_n * np.exp(-1j * sym.k * (n - 1) * 1.0), t_1) < 1e-9


def test_four_barrier_unitarity(model):
    sol = solve_exact(BarrierSystem(4, 1.5, 4.0, V0), model, 3.0)
    assert abs(unitarity_defect(sol)) < 1e-10


def test_wavefunction_at_origin(model):
    system = BarrierSystem(1, 1.0, 1.0, V0)
    sol = solve_exact(system, model, OMEGA)
    assert evaluate_wavefunction(sol, system, model, 0.0) == pytest.approx(1 + sol.R, abs=1e-15)


def test_wavefunction_continuous_across_edge(model):
    system = BarrierSystem(1, 1.0, 1.0, V0)
    sol = solve_exact(system, model, OMEGA)
    below, above = evaluate_wavefunction(sol, system, model, [1.0 - 1e-12, 1.0 + 1e-12])
    assert rel(below, above) < 1e-9


def test_wavefunction_inside_second_barrier(model, sym):
    system = BarrierSystem(2, 1.0, 3.0, V0)
    sol = solve_exact(system, model, OMEGA)
    c = mp_solve(2, 1.0, 3.0, V0, OMEGA)
    half = 0.5
    expected = c[5] * math.exp(sym.chi * half) + c[6] * math.exp(-sym.chi * half)
    assert rel(evaluate_wavefunction(sol, system, model, 3.0 + half), expected) < 1e-10


def test_wavefunction_shapes(model):
    system = BarrierSystem(2, 1.0, 3.0, V0)
    sol = solve_exact(system, model, OMEGA)
    xs = np.linspace(-2, 6, 17)
    assert evaluate_wavefunction(sol, system, model, xs).shape == (17,)
    assert isinstance(evaluate_wavefunction(sol, system, model, 0.3), complex)
    outgoing = evaluate_wavefunction(sol, system, model, 10.0)
    assert outgoing == pytest.approx(sol.T * np.exp(1j * sol.k * (10.0 - 3.0)))


def test_free_case_defect_is_zero():
    free = DispersionModel(0.0)
    sol = solve_exact(BarrierSystem(3, 1.0, 2.5, 0.0), free, 0.7)
    assert abs(unitarity_defect(sol)) < 1e-14


# -- errors and edge cases --------------------------------------------------


def test_argument_errors(model):
    with pytest.raises(DomainError):
        BarrierSystem(0, 1.0, 1.0, V0)
    with pytest.raises(DomainError, match="L >= a"):
        BarrierSystem(2, 2.0, 1.0, V0)
    with pytest.raises(DomainError):
        BarrierSystem(1, -1.0, 1.0, V0)
    system = BarrierSystem(1, 1.0, 1.0, V0)
    with pytest.raises(DomainError):
        solve_exact(system, model, 0.0)
    with pytest.raises(DomainError):
        solve_exact(system, model, V0)  # chi = 0 makes the interface singular
    with pytest.raises(DomainError, match="does not match"):
        solve_exact(system, DispersionModel(3.0), 1.0)


def test_above_barrier_matches_oracle(model):
    system = BarrierSystem(3, 1.0, 2.5, V0)
    sol = solve_exact(system, model, 13.0)
    assert abs(unitarity_defect(sol)) < 1e-12
    ref = mp_solve(3, 1.0, 2.5, V0, 13.0)
    assert np.max(np.abs(sol.coefficients() - ref) / np.abs(ref)) < 1e-10


def test_wide_barrier_warns_but_stays_unitary(model):
    with pytest.warns(ConditioningWarning):
        sol = solve_exact(BarrierSystem(2, 15.0, 20.0, V0), model, OMEGA)
    assert abs(unitarity_defect(sol)) < 1e-10
    assert abs(sol.T) > 0


def test_deep_stack_underflows_gracefully(model):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        sol = solve_exact(BarrierSystem(40, 8.0, 12.0, V0), model, OMEGA)
    assert np.isfinite(sol.R) and abs(sol.R) == pytest.approx(1.0)
    assert np.isfinite(sol.T)


def test_scan_matches_pointwise_and_threads(model):
    system = BarrierSystem(3, 1.0, 3.0, V0)
    omega = np.linspace(0.5, 9.5, 257)
    one = solve_scan(system, model, omega)
    many = solve_scan(system, model, omega, threads=4)
    assert np.array_equal(one.T, many.T) and np.array_equal(one.R, many.R)
    sol = one.solution(100)
    assert sol.T == solve_exact(system, model, omega[100]).T
    assert np.array_equal(transmission(system, model, omega), one.T)


# -- properties -------------------------------------------------------------

instances = st.tuples(
    st.integers(1, 6),
    st.floats(1.0, 20.0),
    st.floats(0.05, 0.95),
    st.floats(0.5, 5.0),
    st.floats(0.0, 10.0),
)


@settings(max_examples=60, deadline=None)
@given(instances)
def test_transfer_matrices_agree_with_dense_solve(inst):
    n, v0, frac, a, gap = inst
    system, model = BarrierSystem(n, a, a + gap, v0), DispersionModel(v0)
    omega = frac * v0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        x = solve_exact(system, model, omega).coefficients()
        y = brute_force_solve(system, model, omega).coefficients()
    chi = complex(np.sqrt(v0 - omega))
    assert natural_scale_error(x, y, system, chi) < 1e-9


@settings(max_examples=25, deadline=None)
@given(instances)
def test_transfer_matrices_agree_with_high_precision(inst):
    n, v0, frac, a, gap = inst
    assume(n <= 4)
    system, model = BarrierSystem(n, a, a + gap, v0), DispersionModel(v0)
    omega = frac * v0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        x = solve_exact(system, model, omega).coefficients()
    y = mp_solve(n, a, a + gap, v0, omega)
    assert natural_scale_error(x, y, system, complex(np.sqrt(v0 - omega))) < 1e-9


@settings(max_examples=60, deadline=None)
@given(instances)
def test_unitarity_and_continuity(inst):
    n, v0, frac, a, gap = inst
    system, model = BarrierSystem(n, a, a + gap, v0), DispersionModel(v0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        sol = solve_exact(system, model, frac * v0)
    assert abs(unitarity_defect(sol)) < 1e-10
    assert interface_residuals(sol, system).max() < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_unitarity_on_dense_grid(model, n):
    scan = solve_scan(BarrierSystem(n, 4.0, 10.0, V0), model, np.linspace(0.01, 9.99, 1000))
    assert np.max(np.abs(unitarity_defect(scan))) < 1e-10


def test_opaque_error_decays_as_exp_minus_two_chi_a(model, sym):
    widths = np.array([3.0, 4.0, 5.0, 6.0])
    errors = []
    for a in widths:
        system = BarrierSystem(2, a, a + 6.0, V0)
        g = solve_exact(system, model, OMEGA).T * np.exp(1j * sym.k * a)
        errors.append(rel(opaque_transmission(system, sym).product, g))
    slope = np.polyfit(widths, np.log(errors), 1)[0]
    assert slope / (-2 * sym.chi) == pytest.approx(1.0, rel=0.05)
