"""Registry of invariant and acceptance checks run by ``multibarrier validate``.

Every check is registered with the module it exercises and the acceptance
criteria it covers, so the command's check list cannot silently drop an entry.
Checks at fixed reference points (V0 = 10, omega = 5, a = 4, chi*a ~ 8.94) are
independent of the run configuration; the rest use the configured system and
tolerances.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import RunConfig
from .dispersion import DispersionModel, dispersion_eval
from .double_barrier import (
    appendix_coefficients,
    correction_terms,
    decompose_exact,
    multiple_reflection_probability,
    no_reflection_budget,
)
from .errors import ConditioningWarning, OpaqueApproximationError
from .exact_solver import (
    BarrierSystem,
    brute_force_solve,
    interface_residuals,
    solve_exact,
    solve_scan,
    unitarity_defect,
)
from .opaque_model import (
    cotangent_rate_sum,
    find_resonances,
    opaque_phase,
    opaque_probability,
    opaque_transmission,
    resonance_denominator,
    resonance_time_budget,
)
from .timing import (
    DiffMethod,
    hartman_scan,
    is_resonant,
    n_independence_scan,
    phase_budget,
    phase_time,
    wrap_angle,
)

REF_V0 = 10.0
REF_OMEGA = 5.0
REF_WIDTH = 4.0
REF_PERIOD = 10.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    criteria: tuple
    func: Callable


@dataclass
class ValidationContext:
    config: RunConfig
    fd_step: float | None = None
    threads: int = 1
    seed: int = 20020918
    cache: dict = field(default_factory=dict)

    @property
    def tol(self):
        return self.config.tolerances


CHECKS: list[Check] = []


def check(name, criteria=()):
    def register(func):
        CHECKS.append(Check(name=name, module=name.split(".")[0], criteria=tuple(criteria), func=func))
        return func

    return register


def _ref():
    model = DispersionModel(REF_V0)
    return model, dispersion_eval(model, REF_OMEGA)


def _rel(x, y):
    return abs(x - y) / max(abs(x), abs(y))


def local_maxima(values):
    v = np.asarray(values)
    return np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1


# -- dispersion -------------------------------------------------------------


@check("dispersion.sum_of_squares")
def _(ctx):
    model = ctx.config.model
    v0 = model.barrier_height
    omega = np.linspace(v0 * 1e-6, v0 * (1 - 1e-6), 1001)
    k, chi = model.free_wavenumber(omega), model.barrier_rate(omega).real
    err = float(np.max(np.abs(k**2 + chi**2 - v0)) / v0)
    return err < 1e-14, f"max |k^2 + chi^2 - V0| / V0 = {err:.2e}"


@check("dispersion.monotone")
def _(ctx):
    model = ctx.config.model
    omega = np.linspace(0.01, 0.99, 1001) * model.barrier_height
    k, chi = model.free_wavenumber(omega), model.barrier_rate(omega).real
    ok = bool(np.all(np.diff(k) > 0) and np.all(np.diff(chi) < 0))
    return ok, "k increasing, chi decreasing" if ok else "monotonicity violated"


@check("dispersion.group_velocity")
def _(ctx):
    model = ctx.config.model
    worst = 0.0
    for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
        w = dispersion_eval(model, frac * model.barrier_height)
        h = 1e-4 * w.k
        fd = (model.omega_of_k(w.k + h) - model.omega_of_k(w.k - h)) / (2 * h)
        worst = max(worst, abs(w.group_velocity - fd) / w.group_velocity)
    return worst < 1e-10, f"max relative mismatch {worst:.2e}"


# -- exact solver -----------------------------------------------------------


def random_instances(seed, count=200):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 7))
        v0 = rng.uniform(1.0, 20.0)
        omega = rng.uniform(0.05, 0.95) * v0
        a = rng.uniform(0.5, 5.0)
        period = a + rng.uniform(0.0, 10.0)
        yield BarrierSystem(n, a, period, v0), DispersionModel(v0), omega


@check("exact_solver.oracle_equivalence", criteria=(1,))
def _(ctx):
    start = time.perf_counter()
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        for system, model, omega in random_instances(ctx.seed):
            x = solve_exact(system, model, omega).coefficients()
            y = brute_force_solve(system, model, omega).coefficients()
            worst = max(worst, float(np.max(np.abs(x - y) / np.maximum(np.abs(x), np.abs(y)))))
    elapsed = time.perf_counter() - start
    return worst < 1e-9 and elapsed < 10.0, f"200 instances, worst rel {worst:.2e}, {elapsed:.2f}s"


@check("exact_solver.unitarity", criteria=(2,))
def _(ctx):
    cfg = ctx.config
    start = time.perf_counter()
    omega = np.linspace(cfg.scan.omega_min, cfg.scan.omega_max, 1000)
    worst = 0.0
    for n in (1, 2, 3, 5):
        scan = solve_scan(cfg.system.with_n(n), cfg.model, omega, threads=ctx.threads)
        worst = max(worst, float(np.max(np.abs(unitarity_defect(scan)))))
    elapsed = time.perf_counter() - start
    ok = worst < cfg.tolerances.unitarity and elapsed < 5.0
    return ok, f"N in 1,2,3,5 x 1000 points, max defect {worst:.2e} (tol {cfg.tolerances.unitarity:g}), {elapsed:.2f}s"


@check("exact_solver.contiguity")
def _(ctx):
    model, w = _ref()
    a = 1.0
    worst = 0.0
    for n in range(2, 6):
        t_n = solve_exact(BarrierSystem(n, a, a, REF_V0), model, REF_OMEGA).T
        t_1 = solve_exact(BarrierSystem(1, n * a, n * a, REF_V0), model, REF_OMEGA).T
        worst = max(worst, _rel(t_n * np.exp(-1j * w.k * (n - 1) * a), t_1))
    return worst < 1e-9, f"max rel {worst:.2e} for N = 2..5"


@check("exact_solver.interface_continuity")
def _(ctx):
    cfg = ctx.config
    omega = np.linspace(cfg.scan.omega_min, cfg.scan.omega_max, 25)
    scan = solve_scan(cfg.system, cfg.model, omega)
    worst = max(float(interface_residuals(scan.solution(i), cfg.system).max()) for i in range(len(scan)))
    return worst < cfg.tolerances.continuity, f"max residual {worst:.2e} (tol {cfg.tolerances.continuity:g})"


@check("exact_solver.opaque_convergence")
def _(ctx):
    model, w = _ref()
    widths = np.array([3.0, 4.0, 5.0, 6.0, 7.0]) / w.chi
    slopes = []
    for n in (1, 2, 3):
        errs = []
        for a in widths:
            system = BarrierSystem(n, a, a + 6.0, REF_V0)
            t = solve_exact(system, model, REF_OMEGA).T
            errs.append(abs(t * np.exp(1j * w.k * a) - opaque_transmission(system, w).product) / abs(t))
        slopes.append(np.polyfit(widths, np.log(errs), 1)[0] / (-2 * w.chi))
    worst = max(abs(s - 1) for s in slopes)
    return worst < 0.05, "log-error slope / (-2 chi) = " + ", ".join(f"{s:.4f}" for s in slopes)


# -- opaque model -----------------------------------------------------------


@check("opaque_model.factorization_accuracy", criteria=(3,))
def _(ctx):
    model, w = _ref()
    details, ok = [], True
    for n in (1, 2, 3):
        errs = []
        for a in (REF_WIDTH, 2 * REF_WIDTH):
            system = BarrierSystem(n, a, a + REF_PERIOD - REF_WIDTH, REF_V0)
            t = solve_exact(system, model, REF_OMEGA).T
            p = opaque_transmission(system, w).product
            errs.append(abs(t * np.exp(1j * w.k * a) - p) / abs(t))
        ok &= errs[0] < ctx.tol.opaque_rel and errs[0] >= 10 * errs[1]
        details.append(f"N={n}: {errs[0]:.2e} -> {errs[1]:.2e}")
    return ok, "; ".join(details)


@check("opaque_model.phase_structure_independence")
def _(ctx):
    worst = 0.0
    model = DispersionModel(REF_V0)
    for omega in (2.0, 5.0, 7.0):
        w = dispersion_eval(model, omega)
        phi = opaque_phase(w)
        for n in (1, 2, 3, 5):
            for a in (2.0, 4.0, 6.0):
                for gap in (0.0, 1.0, 3.0, 6.0):
                    try:
                        p = opaque_transmission(BarrierSystem(n, a, a + gap, REF_V0), w).product
                    except OpaqueApproximationError:
                        continue
                    d = float(wrap_angle(2 * (np.angle(p) - phi))) / 2
                    worst = max(worst, abs(d))
    return worst < 1e-12, f"max |arg(product) - phi| mod pi = {worst:.2e}"


@check("opaque_model.probability_consistency")
def _(ctx):
    model = DispersionModel(REF_V0)
    worst = 0.0
    for omega in (2.0, 5.0, 7.0):
        w = dispersion_eval(model, omega)
        for n in (1, 2, 3, 5):
            for gap in (0.0, 1.0, 6.0):
                system = BarrierSystem(n, 4.0, 4.0 + gap, REF_V0)
                try:
                    p = opaque_probability(system, w)
                    q = abs(opaque_transmission(system, w).product) ** 2
                except OpaqueApproximationError:
                    continue
                worst = max(worst, _rel(p, q))
    return worst < 1e-12, f"max rel {worst:.2e}"


def _config_roots(ctx):
    if "roots" not in ctx.cache:
        cfg = ctx.config
        ctx.cache["roots"] = find_resonances(
            cfg.system, cfg.model, cfg.scan.omega_min, cfg.scan.omega_max, max(cfg.scan.steps, 10_000)
        )
    return ctx.cache["roots"]


@check("opaque_model.roots_are_poles")
def _(ctx):
    cfg = ctx.config
    report = _config_roots(ctx)
    worst = 0.0
    for r, d in zip(report.roots, report.residuals):
        w = dispersion_eval(cfg.model, r)
        worst = max(worst, d / (2 * w.chi * w.k))
    tan_product = max((abs(x) for x in report.tan_product_residuals), default=0.0)
    ok = worst < 1e-10 and tan_product < 1e-8
    return ok, f"{len(report.roots)} roots, max |D|/2chi k = {worst:.2e}, max tan-product residual {tan_product:.2e}"


@check("opaque_model.exact_corroboration", criteria=(6,))
def _(ctx):
    cfg = ctx.config
    system = cfg.system.with_n(2)
    omega = np.linspace(cfg.scan.omega_min, cfg.scan.omega_max, cfg.scan.steps)
    step = omega[1] - omega[0]
    prob = np.abs(solve_scan(system, cfg.model, omega, threads=ctx.threads).T) ** 2
    peaks = omega[local_maxima(prob)]
    report = _config_roots(ctx)
    tested, missing = 0, []
    for r in report.roots:
        if dispersion_eval(cfg.model, r).chi * system.width < 5.0:
            continue
        tested += 1
        if peaks.size == 0 or np.min(np.abs(peaks - r)) > step * (1 + 1e-9):
            missing.append(r)
    return not missing, f"{tested} opaque roots checked, unmatched: {missing}"


@check("opaque_model.root_n_independence", criteria=(6,))
def _(ctx):
    model = DispersionModel(REF_V0)
    base = BarrierSystem(2, REF_WIDTH, REF_PERIOD, REF_V0)
    report = find_resonances(base, model, 0.5, 9.5, 10_000)
    omega = np.linspace(0.5, 9.5, 10_000)
    step = omega[1] - omega[0]
    # chi a >= 8 keeps the N = 3 doublet splitting below one grid step
    opaque = omega <= REF_V0 - (8.0 / REF_WIDTH) ** 2
    peaks = {}
    for n in (2, 3):
        prob = np.abs(solve_scan(base.with_n(n), model, omega, threads=ctx.threads).T) ** 2
        idx = local_maxima(prob)
        peaks[n] = omega[idx[opaque[idx]]]
    same_count = peaks[2].size == peaks[3].size
    shift = float(np.max(np.abs(peaks[2] - peaks[3]))) if same_count and peaks[2].size else math.inf
    ok = report.n_independence_spread == 0.0 and same_count and shift <= step * (1 + 1e-9)
    return ok, (
        f"opaque root spread {report.n_independence_spread:g}; exact peaks N=2 {peaks[2].size}, "
        f"N=3 {peaks[3].size}, max shift {shift:.2e} (step {step:.2e})"
    )


@check("opaque_model.resonance_time_budget", criteria=(10,))
def _(ctx):
    model = DispersionModel(REF_V0)
    system = BarrierSystem(2, REF_WIDTH, 7.0, REF_V0)
    report = find_resonances(system, model, 0.1, 9.9, 10_000)
    budgets = [resonance_time_budget(system, model, r) for r in report.roots]
    finite = all(math.isfinite(x) for b in budgets for x in b)
    positive = all(b.tau0 > 0 for b in budgets)
    theta = lambda x: 0.3 + 0.1 * x + 0.02 * x * x  # noqa: E731
    resid, rate = cotangent_rate_sum(theta, lambda x: math.pi / 2 - theta(x), 1.7)
    ok = finite and positive and bool(budgets) and abs(resid) < 1e-8 and abs(rate) < 1e-8
    sums = ", ".join(f"{b.sum:.4f}" for b in budgets)
    return ok, f"{len(budgets)} roots, tau+tau0 = [{sums}]; synthetic identity residual {resid:.1e}, rate sum {rate:.1e}"


# -- double barrier ---------------------------------------------------------


def _ref_pair():
    model, w = _ref()
    system = BarrierSystem(2, REF_WIDTH, REF_PERIOD, REF_V0)
    return model, w, system


@check("double_barrier.reconstruction", criteria=(7,))
def _(ctx):
    model, _, system = _ref_pair()
    omega = np.linspace(0.5, 9.5, 181)
    scan = solve_scan(system, model, omega)
    worst = 0.0
    for i in range(len(scan)):
        sol = scan.solution(i)
        d = decompose_exact(sol, system, model)
        worst = max(worst, abs(d.t1 * d.t2 * d.s - sol.T) / abs(sol.T))
    return worst < 1e-10, f"181 frequencies, max rel {worst:.2e}"


@check("double_barrier.partial_unitarity", criteria=(7,))
def _(ctx):
    model = DispersionModel(REF_V0)
    worst, used = 0.0, 0
    for omega in np.linspace(1.0, 6.0, 11):
        chi = math.sqrt(REF_V0 - omega)
        a = 8.0 / chi
        if is_resonant(model, omega, 6.0):
            continue
        used += 1
        system = BarrierSystem(2, a, a + 6.0, REF_V0)
        d = decompose_exact(solve_exact(system, model, omega), system, model)
        worst = max(worst, abs(abs(d.r1) ** 2 + abs(d.t1) ** 2 - 1), abs(abs(d.r2) ** 2 + abs(d.t2) ** 2 - 1))
    return worst < 1e-8 and used > 0, f"chi a = 8, {used} off-resonance frequencies, max defect {worst:.2e}"


@check("double_barrier.deficit_excess_duality", criteria=(7,))
def _(ctx):
    _, w, system = _ref_pair()
    budget = no_reflection_budget(w, system)
    p_mr = multiple_reflection_probability(w, system)
    _, _, r_r, t_r = correction_terms(w, system)
    p_r = abs(r_r) ** 2 + abs(t_r) ** 2
    vals = [budget.deficit, budget.ors_excess, p_mr, p_r]
    worst = max(_rel(x, y) for i, x in enumerate(vals) for y in vals[i + 1 :])
    return worst < 1e-6 and budget.deficit > 0 and budget.ors_excess > 0, (
        f"deficit {budget.deficit:.6e}, excess {budget.ors_excess:.6e}, F^2e^-2chi a {p_mr:.6e}, "
        f"|R_R|^2+|T_R|^2 {p_r:.6e}; max pairwise rel {worst:.2e}"
    )


@check("double_barrier.phase_ratio", criteria=(7,))
def _(ctx):
    model = DispersionModel(REF_V0)
    worst = 0.0
    for omega in (2.0, 5.0, 7.0):
        w = dispersion_eval(model, omega)
        for period in (8.0, 9.0, 10.0, 13.0):
            system = BarrierSystem(2, REF_WIDTH, period, REF_V0)
            try:
                r_q, t_q, r_r, t_r = correction_terms(w, system)
            except OpaqueApproximationError:
                continue
            target = -np.exp(1j * w.k * (period - 2 * REF_WIDTH))
            worst = max(worst, abs(r_q / r_r - target), abs(t_q / t_r - target))
    return worst < 1e-12, f"max |ratio + e^(ik(L-2a))| = {worst:.2e}"


@check("double_barrier.opaque_limit_matching")
def _(ctx):
    model, w = _ref()
    widths = np.array([3.0, 4.0, 5.0, 6.0, 7.0]) / w.chi
    errs = {"r1": [], "t1": [], "r2": [], "t2": []}
    for a in widths:
        system = BarrierSystem(2, a, a + 6.0, REF_V0)
        d = decompose_exact(solve_exact(system, model, REF_OMEGA), system, model)
        shift = np.exp(1j * w.k * system.period)
        errs["r1"].append(_rel(d.r1, d.r_ob + d.r_q + d.r_r))
        errs["t1"].append(_rel(d.t1, d.t_ob + d.t_q + d.t_r))
        errs["r2"].append(_rel(d.r2, d.r_ob * shift))
        errs["t2"].append(_rel(d.t2, d.t_ob * shift))
    ok = True
    for name, e in errs.items():
        scaled = np.asarray(e) * np.exp(2 * w.chi * widths)
        ok &= bool(np.all(np.diff(scaled) <= 0.05 * scaled[:-1]))
    detail = "; ".join(f"{n}: {e[0]:.1e} -> {e[-1]:.1e}" for n, e in errs.items())
    return ok, detail + " (chi a 3 -> 7)"


@check("double_barrier.appendix", criteria=(9,))
def _(ctx):
    model, w, system = _ref_pair()
    sol = solve_exact(system, model, REF_OMEGA)
    app = appendix_coefficients(w, system)
    (a2, b2), (a4, b4) = sol.barrier_coeffs
    a3, b3 = sol.gap_coeffs[0]
    pairs = {
        "r": (app.r, sol.R), "a2": (app.a2, a2), "b2": (app.b2, b2), "a3": (app.a3, a3),
        "b3": (app.b3, b3), "b4": (app.b4, b4), "t": (app.t, sol.T * np.exp(1j * sol.k * system.width)),
    }
    res = {name: abs(x - y) / abs(y) for name, (x, y) in pairs.items()}
    res["a4"] = abs(a4) / abs(b4)
    worst = max(res.values())
    ok = worst < ctx.tol.opaque_rel and app.a4 == 0
    return ok, "rel residuals " + ", ".join(f"{n}={v:.1e}" for n, v in res.items())


# -- timing -----------------------------------------------------------------


@check("timing.budget_closure", criteria=(8,))
def _(ctx):
    model, _, system = _ref_pair()
    worst = 0.0
    for omega in np.linspace(0.5, 9.5, 91):
        worst = max(worst, abs(phase_budget(system, model, omega).closure_residual))
    return worst < 1e-10, f"91 frequencies, max closure residual {worst:.2e}"


@check("timing.opaque_phase_identities", criteria=(8,))
def _(ctx):
    model, _, system = _ref_pair()
    b = phase_budget(system, model, REF_OMEGA)
    res = {
        "phi1": abs(float(wrap_angle(b.phi1 - b.pred_phi1))),
        "phi2-kL": abs(float(wrap_angle(b.phi2 - system.period * math.sqrt(REF_OMEGA) - b.pred_phi2_minus_kl))),
        "phiS": abs(float(wrap_angle(b.phi_s - b.pred_phi_s))),
        "phi1+phiS": abs(b.edge_to_edge),
        "phi0-phi1": abs(float(wrap_angle(b.first_barrier_shift - b.pred_first_barrier_shift))),
    }
    eq = phase_budget(BarrierSystem(2, REF_WIDTH, 2 * REF_WIDTH, REF_V0), model, REF_OMEGA)
    res["phi0-phi1 (L=2a)"] = abs(eq.first_barrier_shift)
    worst = max(res.values())
    return worst < 1e-3, ", ".join(f"{n}: {v:.1e}" for n, v in res.items())


@check("timing.hartman", criteria=(4,))
def _(ctx):
    model, w = _ref()
    widths = [ca / w.chi for ca in (8.0, 12.0, 16.0)]
    exact = hartman_scan(model, REF_OMEGA, widths, step=ctx.fd_step)
    opaque = hartman_scan(model, REF_OMEGA, widths, opaque=True)
    ok = exact.spread < 1e-2 and opaque.spread == 0.0
    return ok, f"exact spread {exact.spread:.2e}, opaque spread {opaque.spread:g}"


@check("timing.n_independence", criteria=(5,))
def _(ctx):
    model, _ = _ref()
    exact = n_independence_scan(model, REF_OMEGA, REF_WIDTH, REF_PERIOD, (1, 2, 3), step=ctx.fd_step)
    opaque = n_independence_scan(model, REF_OMEGA, REF_WIDTH, REF_PERIOD, (1, 2, 3), opaque=True)
    ok = exact.spread < 1e-2 and opaque.spread == 0.0 and not exact.resonant
    return ok, f"exact spread {exact.spread:.2e}, opaque spread {opaque.spread:g}, resonant={exact.resonant}"


@check("timing.differentiation_robustness")
def _(ctx):
    model, _, system = _ref_pair()
    worst = 0.0
    for omega in (1.3, 2.7, 5.0, 6.5):
        if abs(float(resonance_denominator(system, model, omega))) < 0.1 * 2 * math.sqrt(omega * (REF_V0 - omega)):
            continue
        a = phase_time(system, model, omega, ctx.fd_step).tau
        b = phase_time(system, model, omega, ctx.fd_step, method=DiffMethod.CENTRAL_DIFFERENCE).tau
        worst = max(worst, _rel(a, b))
    return worst < 1e-6, f"max rel difference {worst:.2e}"


def run_checks(ctx: ValidationContext, names=None) -> list[CheckResult]:
    results = []
    for c in CHECKS:
        if names and c.name not in names:
            continue
        start = time.perf_counter()
        try:
            passed, detail = c.func(ctx)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(c.name, bool(passed), detail, time.perf_counter() - start))
    return results
