"""Command line front end.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error,
3 numerical failure (singular system, amplitude underflow, resonance guard).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings

import numpy as np

from .config import ConfigError, RunConfig, Tolerances, load_config
from .dispersion import dispersion_eval
from .double_barrier import (
    appendix_coefficients,
    decompose_exact,
    multiple_reflection_probability,
    no_reflection_budget,
)
from .errors import ConditioningWarning, DomainError, MultibarrierError, OpaqueApproximationError
from .exact_solver import evaluate_wavefunction, solve_exact, solve_scan, unitarity_defect
from .opaque_model import OPAQUE_WARN_CHI_A, find_resonances, opaque_probability, resonance_time_budget
from .timing import phase_budget, phase_times, unwrapped_phase

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SCAN_COLUMNS = [
    "omega", "k", "chi", "re_T", "im_T", "re_R", "im_R", "P_T", "phi_unwrapped",
    "tau", "unitarity_defect", "opaque_P_T", "opaque_valid",
]


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, '.' decimal point; None becomes an empty cell."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(stream, header, rows):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def flatten(doc, prefix=""):
    """Key paths to scalars, complex values split into .re/.im, for CSV output."""
    out = []
    if isinstance(doc, dict):
        for k, v in doc.items():
            out.extend(flatten(v, f"{prefix}{k}."))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            out.extend(flatten(v, f"{prefix}{i}."))
    else:
        out.append((prefix[:-1], doc))
    return out


def _emit(args, cfg, text_fn):
    path = args.output or cfg.output.path
    text = text_fn()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _format(args, cfg):
    return args.format or cfg.output.format


def _omega_grid(cfg: RunConfig):
    return np.linspace(cfg.scan.omega_min, cfg.scan.omega_max, cfg.scan.steps)


# -- subcommands ------------------------------------------------------------


def scan_rows(cfg: RunConfig, fd_step=None, threads=1):
    system, model = cfg.system, cfg.model
    omega = _omega_grid(cfg)
    scan = solve_scan(system, model, omega, threads=threads)
    phi = unwrapped_phase(system, model, omega, threads=threads)
    tau = phase_times(system, model, omega, step=fd_step, threads=threads)
    defect = unitarity_defect(scan)
    rows = []
    for i, om in enumerate(omega):
        w = dispersion_eval(model, om)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                p_opaque = opaque_probability(system, w)
            valid = w.chi * system.width >= OPAQUE_WARN_CHI_A
        except OpaqueApproximationError:
            p_opaque, valid = None, False
        t, r = scan.T[i], scan.R[i]
        rows.append([
            om, scan.k[i], w.chi, t.real, t.imag, r.real, r.imag, abs(t) ** 2,
            phi[i], tau[i], defect[i], p_opaque, int(valid),
        ])
    return rows


def cmd_scan(args, cfg):
    rows = scan_rows(cfg, args.fd_step, args.threads)
    if _format(args, cfg) == "json":
        records = [dict(zip(SCAN_COLUMNS, row)) for row in rows]
        _emit(args, cfg, lambda: json.dumps(to_jsonable(records), indent=1) + "\n")
    else:
        def render():
            buf = io.StringIO()
            write_csv(buf, SCAN_COLUMNS, rows)
            return buf.getvalue()

        _emit(args, cfg, render)
    bad = [row[0] for row in rows if abs(row[10]) >= cfg.tolerances.unitarity]
    if bad:
        print(f"unitarity defect above {cfg.tolerances.unitarity:g} at {len(bad)} frequencies", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def resonance_document(cfg: RunConfig, grid_points: int):
    system, model = cfg.system, cfg.model
    report = find_resonances(system, model, cfg.scan.omega_min, cfg.scan.omega_max, grid_points)
    roots = []
    for omega, d, eq in zip(report.roots, report.residuals, report.tan_product_residuals):
        b = resonance_time_budget(system, model, omega)
        roots.append({
            "omega_res": omega, "residual_D": d, "eq212_residual": eq,
            "tau": b.tau, "tau0": b.tau0, "tau_plus_tau0": b.sum,
        })
    return {
        "system": cfg.to_dict()["system"],
        "window": [cfg.scan.omega_min, cfg.scan.omega_max],
        "grid_points": grid_points,
        "n_independence_spread": report.n_independence_spread,
        "roots": roots,
    }


def cmd_resonances(args, cfg):
    doc = resonance_document(cfg, args.grid_points or max(cfg.scan.steps, 10_000))
    if _format(args, cfg) == "csv":
        cols = ["omega_res", "residual_D", "eq212_residual", "tau", "tau0", "tau_plus_tau0"]

        def render():
            buf = io.StringIO()
            write_csv(buf, cols, [[r[c] for c in cols] for r in doc["roots"]])
            return buf.getvalue()

        _emit(args, cfg, render)
    else:
        _emit(args, cfg, lambda: json.dumps(to_jsonable(doc), indent=2) + "\n")
    return EXIT_OK


def decomposition_document(cfg: RunConfig, omega: float):
    system, model = cfg.system, cfg.model
    if system.n_barriers != 2:
        raise UsageError(f"decompose needs a two-barrier system, config has N = {system.n_barriers}")
    sol = solve_exact(system, model, omega)
    dec = decompose_exact(sol, system, model)
    budget = phase_budget(system, model, omega)
    doc = {
        "omega": omega,
        "R": sol.R,
        "T": sol.T,
        "partial": {k: getattr(dec, k) for k in dec.__dataclass_fields__},
        "phase_budget": {k: getattr(budget, k) for k in budget.__dataclass_fields__},
        "checks": {
            "reconstruction_residual": abs(dec.t1 * dec.t2 * dec.s - sol.T) / abs(sol.T),
            "partial_unitarity_first": abs(dec.r1) ** 2 + abs(dec.t1) ** 2 - 1,
            "partial_unitarity_second": abs(dec.r2) ** 2 + abs(dec.t2) ** 2 - 1,
        },
    }
    if dec.f_factor is None:
        doc["opaque_valid"] = False
        return doc
    doc["opaque_valid"] = True
    w = dispersion_eval(model, omega)
    target = -np.exp(1j * sol.k * (system.period - 2 * system.width))
    nb = no_reflection_budget(w, system)
    doc["checks"].update({
        "phase_ratio_residual_R": abs(dec.r_q / dec.r_r - target),
        "phase_ratio_residual_T": abs(dec.t_q / dec.t_r - target),
        "half_period_s_rel_residual": abs(dec.s_half_period - dec.s) / abs(dec.s) if dec.s_half_period is not None else None,
    })
    doc["no_reflection_budget"] = {
        "deficit": nb.deficit,
        "ors_excess": nb.ors_excess,
        "multiple_reflection_probability": multiple_reflection_probability(w, system),
        "P_R": abs(dec.r_r) ** 2 + abs(dec.t_r) ** 2,
    }
    app = appendix_coefficients(w, system)
    (a2, b2), (a4, b4) = sol.barrier_coeffs
    a3, b3 = sol.gap_coeffs[0]
    exact = {
        "r": sol.R, "a2": a2, "b2": b2, "a3": a3, "b3": b3, "a4": a4, "b4": b4,
        "t": sol.T * np.exp(1j * sol.k * system.width),
    }
    appendix = {}
    for name, value in exact.items():
        approx = getattr(app, name)
        # a4 is zero at this order; its size is measured against b4
        scale = abs(b4) if name == "a4" else abs(value)
        appendix[name] = {"appendix": approx, "exact": value, "rel_residual": abs(approx - value) / scale}
    doc["appendix"] = appendix
    return doc


def cmd_decompose(args, cfg):
    omega = args.omega if args.omega is not None else 0.5 * (cfg.scan.omega_min + cfg.scan.omega_max)
    doc = to_jsonable(decomposition_document(cfg, omega))
    if _format(args, cfg) == "csv":
        def render():
            buf = io.StringIO()
            write_csv(buf, ["key", "value"], flatten(doc))
            return buf.getvalue()

        _emit(args, cfg, render)
    else:
        _emit(args, cfg, lambda: json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args, cfg):
    from .validation import CHECKS, ValidationContext, run_checks

    if args.list:
        for c in CHECKS:
            crit = ",".join(str(x) for x in c.criteria) or "-"
            print(f"{c.name}  [criteria: {crit}]")
        return EXIT_OK
    start = time.perf_counter()
    ctx = ValidationContext(config=cfg, fd_step=args.fd_step, threads=args.threads)
    results = run_checks(ctx, set(args.only) if args.only else None)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = sum(not r.passed for r in results)
    elapsed = time.perf_counter() - start
    print(f"{len(results) - failed}/{len(results)} checks passed in {elapsed:.1f}s")
    return EXIT_FAILED if failed else EXIT_OK


def wavefunction_rows(cfg: RunConfig, omega, x_min, x_max, points):
    system, model = cfg.system, cfg.model
    if not x_max > x_min or points < 2:
        raise UsageError("wavefunction needs x_max > x_min and points >= 2")
    sol = solve_exact(system, model, omega)
    edges = system.interfaces()
    x = np.union1d(np.linspace(x_min, x_max, points), edges[(edges >= x_min) & (edges <= x_max)])
    psi = evaluate_wavefunction(sol, system, model, x)
    return [[xi, p.real, p.imag, abs(p) ** 2] for xi, p in zip(x, psi)]


def cmd_wavefunction(args, cfg):
    omega = args.omega if args.omega is not None else 0.5 * (cfg.scan.omega_min + cfg.scan.omega_max)
    x_max = args.x_max if args.x_max is not None else cfg.system.length + 5.0
    rows = wavefunction_rows(cfg, omega, args.x_min, x_max, args.points)
    cols = ["x", "re_psi", "im_psi", "abs_psi2"]
    if _format(args, cfg) == "json":
        _emit(args, cfg, lambda: json.dumps([dict(zip(cols, r)) for r in rows], indent=1) + "\n")
    else:
        def render():
            buf = io.StringIO()
            write_csv(buf, cols, rows)
            return buf.getvalue()

        _emit(args, cfg, render)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")
    p.add_argument("--output", default=argparse.SUPPRESS, help="output file ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads, 0 = auto")
    p.add_argument("--fd-step", type=float, default=argparse.SUPPRESS, help="absolute finite-difference step")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="multibarrier",
        description="Tunneling through N equally spaced rectangular barriers.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("scan", parents=[common], help="frequency scan of R, T, phase and phase time")

    p = sub.add_parser("resonances", parents=[common], help="resonant frequencies and time budgets")
    p.add_argument("--grid-points", type=int, default=None)

    p = sub.add_parser("decompose", parents=[common], help="two-barrier partial decomposition")
    p.add_argument("--omega", type=float, default=None)

    p = sub.add_parser("validate", parents=[common], help="run the invariant and acceptance checks")
    p.add_argument("--list", action="store_true", help="list registered checks and exit")
    p.add_argument("--only", action="append", metavar="NAME", help="run only the named check (repeatable)")

    p = sub.add_parser("wavefunction", parents=[common], help="dump psi(x) at one frequency")
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--x-min", type=float, default=-5.0)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--points", type=int, default=1001)
    return parser


COMMANDS = {
    "scan": cmd_scan,
    "resonances": cmd_resonances,
    "decompose": cmd_decompose,
    "validate": cmd_validate,
    "wavefunction": cmd_wavefunction,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name, default in (("config", None), ("output", None), ("format", None), ("threads", 1), ("fd_step", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        cfg = load_config(args.config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditioningWarning)
            return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MultibarrierError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
