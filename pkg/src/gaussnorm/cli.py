"""Command-line interface: one subcommand per library operation.

Every run writes a single JSON document (or a CSV table) holding the
command, its parsed inputs, the seed, library versions and the results.
Exit status is 0 on success, 1 when a checked property fails and 2 on
usage errors. Vector indices are 0-based.
"""

import argparse
import contextlib
import csv
import io
import json
import math
import os
import platform
import sys

import numpy as np

from . import __version__, geometry, landscape, montecarlo, special, supnorm
from .errors import ConvergenceError, DetectionError, DomainError, GaussNormError
from .kernels import BACKEND
from .quadrature import QuadratureConfig

SEED_ENV = "GAUSSNORM_SEED"

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2


# parsing -------------------------------------------------------------------------

def parse_real(text):
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("nan is not accepted")
    return v


def parse_vector(text):
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty vector")
    return [parse_real(p) for p in parts]


def parse_int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = part.split(":", 1)
            try:
                out.extend(range(int(a), int(b) + 1))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad range {part!r}") from None
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise argparse.ArgumentTypeError(f"not an integer: {part!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def parse_matrix(text):
    rows = [parse_vector(r) for r in text.split(";") if r.strip()]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise argparse.ArgumentTypeError("matrix must be square: rows separated by ';'")
    return rows


# serialisation -------------------------------------------------------------------

def fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = fmt_float(obj)
        # non-finite values are not valid JSON numbers
        return f'"{s}"' if not math.isfinite(obj) else s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(doc):
    return _encode(_plain(doc), 2, 0) + "\n"


def to_csv(rows):
    buf = io.StringIO()
    if not rows:
        return ""
    header = list(rows[0].keys())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else
                    ";".join(fmt_float(x) for x in v) if isinstance(v, (list, tuple)) else v
                    for v in (_plain(r.get(h)) for h in header)])
    return buf.getvalue()


def write_xy(path, xs, ys, xname="x", yname="y"):
    with open(path, "w") as fh:
        fh.write(f"{xname} {yname}\n")
        for x, y in zip(xs, ys):
            fh.write(f"{fmt_float(x)} {fmt_float(y)}\n")


# command implementations -----------------------------------------------------------
# each returns (results, table_rows, passed)

def _cfg(args):
    return QuadratureConfig(args.rel_tol, args.abs_tol, args.tail_epsilon)


def _mc(args, samples=None):
    return montecarlo.McParams(samples or args.samples, args.seed, args.threads)


def cmd_expectation(args):
    n = len(args.u)
    spec = landscape.PQSpec(args.p, 2.0, n)
    res = landscape.expected_pnorm(args.u, spec, args.method, _cfg(args), _mc(args))
    out = {"value": res.value, "error_bound": res.error_bound, "method": res.method}
    return out, [out], True


def _ek_rows(tab):
    asym = dict(tab.asymptotic)
    return [{"k": k, "value": v, "asymptotic_ratio": asym.get(k)} for k, v in tab.rows]


def cmd_ek_table(args):
    tab = supnorm.ek_table(args.n, _cfg(args))
    ok = tab.strictly_decreasing_from_2 and tab.first_two_gap <= 1e-9
    rows = _ek_rows(tab)
    return {"rows": rows, "monotone": tab.strictly_decreasing_from_2, "min_margin": tab.min_margin,
            "first_two_gap": tab.first_two_gap}, rows, ok


def cmd_ekq_table(args):
    tab = landscape.ekq_table(args.n, args.q, _cfg(args))
    vals = tab.values
    from1 = bool(np.all(np.diff(vals) < 0))
    rows = _ek_rows(tab)
    expect = from1 if args.q < 2 else tab.strictly_decreasing_from_2
    return {"rows": rows, "q": args.q, "strictly_decreasing_from_1": from1,
            "strictly_decreasing_from_2": tab.strictly_decreasing_from_2}, rows, expect


def cmd_median(args):
    rows = []
    for n in args.n:
        mu = supnorm.median_supnorm(n)
        rows.append({"n": n, "median": mu,
                     "ratio_to_sqrt_2logn": mu / math.sqrt(2 * math.log(n)) if n > 1 else None})
    return {"rows": rows}, rows, True


def cmd_critical_residual(args):
    cfg = _cfg(args)
    r = supnorm.critical_point_residual(args.u, args.i, args.j, cfg)
    di = supnorm.partial_derivative(args.u, args.i, cfg)
    dj = supnorm.partial_derivative(args.u, args.j, cfg)
    out = {"residual": r, "partial_i": di, "partial_j": dj,
           "sign_convention": "positive when u_i > u_j"}
    return out, [out], True


def cmd_r_rho(args):
    cfg = _cfg(args)
    rows = []
    for rho in args.rho:
        rows.append({"rho": rho, "R": supnorm.r_rho(args.n, rho, cfg),
                     "R_prime": supnorm.r_rho_derivative(args.n, rho, cfg)})
    vals = [r["R"] for r in rows]
    dec = all(a >= b for a, b in zip(vals, vals[1:])) if sorted(args.rho) == list(args.rho) else None
    return {"n": args.n, "rows": rows, "derivative_identically_zero": args.n == 1,
            "nonincreasing_on_grid": dec}, rows, dec is not False


def cmd_optimize(args):
    spec = landscape.PQSpec(args.p, args.q, args.n)
    try:
        u, res = landscape.optimize_on_lq_sphere(spec, args.mode, args.starts, args.seed,
                                                 candidates=not args.no_candidates,
                                                 max_iter=args.max_iter)
    except ConvergenceError as exc:
        b = exc.best
        out = {"converged": False, "u": b.u, "value": b.value, "residual": b.residual,
               "message": str(exc)}
        return out, [out], False
    d = res.detail
    out = {"converged": True, "u": list(u.entries), "value": res.value, "method": res.method,
           "residual": d["residual"], "start": d["start"],
           "constant_landscape": d["constant_landscape"]}
    return out, [out], True


def _point_dict(c):
    return {"t": c.t, "u": list(c.location), "kind": c.kind, "value": c.value,
            "gap": c.gap, "residual": c.residual, "resolved": c.resolved}


def cmd_landscape(args):
    row = landscape.scan_landscape_n2(args.p, args.q, args.grid_size)
    pts = [_point_dict(c) for c in row.points]
    out = {"p": row.p, "q": row.q, "points": pts, "n_min": row.n_min, "n_max": row.n_max,
           "axis_growth_order": row.endpoint_order,
           "global_min_t": row.global_min().t, "global_max_t": row.global_max().t}
    if args.data_out:
        prof = landscape._profile(row.p)
        s = np.linspace(landscape.S_MIN, 0.0, args.grid_size)
        theta = np.arctan(np.exp(s))
        write_xy(args.data_out, theta, [prof.value(v, row.q) for v in s], "theta", "value_minus_axis")
    return out, pts, True


def cmd_phase(args):
    if not args.n2p2:
        raise DomainError("only the n=2 detector is available: pass --n2p2")
    th = landscape.detect_thresholds(args.p)
    out = {"p": args.p}
    for name, (v, (lo, hi)) in th.items():
        out[name] = v
        out[name + "_bracket"] = [lo, hi]
    ok = True
    if args.p == 2.0:
        q_m = th["q_M"][0]
        out["q_M_identity_residual"] = abs(2 ** (-1 / q_m) * math.sqrt(math.pi / 2)
                                           - math.sqrt(2 / math.pi))
    if args.q_grid:
        out["rows"] = []
        for q in args.q_grid:
            r = landscape.scan_landscape_n2(args.p, q, args.grid_size)
            out["rows"].append({"q": q, "n_min": r.n_min, "n_max": r.n_max,
                                "axis": r.kind_at("axis"), "uniform": r.kind_at("uniform")})
    table = [{"threshold": k, "value": th[k][0], "lo": th[k][1][0], "hi": th[k][1][1]} for k in th]
    return out, table, ok


def cmd_explore(args):
    rows = landscape.exploratory_scan_pinf_qgt2(args.n, args.q_grid, _cfg(args),
                                                starts=args.starts, seed=args.seed,
                                                optimize=not args.no_optimize)
    table = [{"q": r["q"], "candidate_argmin_k": r["candidate_argmin_k"],
              "candidate_argmax_k": r["candidate_argmax_k"],
              "uniform_exceeds_axis": r["uniform_exceeds_axis"]} for r in rows]
    return {"n": args.n, "rows": rows, "note": "exploratory; nothing asserted"}, table, True


def _cov(args):
    return montecarlo.CovarianceSpec(args.cov)


def cmd_mc_norm(args):
    est = montecarlo.mc_expected_norm(_cov(args), args.p, _mc(args))
    out = {"mean": est.mean, "std_error": est.std_error, "samples": est.samples}
    return out, [out], True


def _sidak_rows(name, rep):
    return [{"case": name, "t": t, "empirical": e, "product": p, "margin": m, "std_error": s,
             "violation": i in rep.violations}
            for i, (t, e, p, m, s) in enumerate(zip(rep.t, rep.empirical, rep.product,
                                                     rep.margin, rep.std_error))]


def cmd_sidak(args):
    params = _mc(args)
    if args.battery:
        cases = montecarlo.sidak_battery(args.seed)
    elif args.cov is not None:
        cases = [("input", _cov(args))]
    else:
        raise DomainError("pass --cov or --battery")
    rows, summary = [], []
    for k, (name, cov) in enumerate(cases):
        rep = montecarlo.sidak_check(cov, args.t_grid, params, stream=k)
        rows += _sidak_rows(name, rep)
        summary.append({"case": name, "ok": rep.ok, "min_z": rep.min_z})
    ok = all(s["ok"] for s in summary)
    return {"cases": summary, "rows": rows, "all_ok": ok}, rows, ok


def cmd_theorem2(args):
    params = _mc(args)
    if args.cov is not None:
        covs = [("input", _cov(args))]
    else:
        covs = [(f"random n={n} #{j}", montecarlo.random_trace_one_psd(n, args.seed, j))
                for n in args.random for j in range(args.count)]
    rows = []
    for k, (name, cov) in enumerate(covs):
        v = montecarlo.theorem2_bounds_check(cov, params, stream=k)
        rows.append({"case": name, "n": cov.n, "estimate": v.estimate.mean,
                     "std_error": v.estimate.std_error, "lower": v.lower, "upper": v.upper,
                     "passed": v.passed})
    ok = all(r["passed"] for r in rows)
    return {"rows": rows, "all_passed": ok}, rows, ok


def cmd_v1(args):
    v = geometry.v1_crosspolytope(geometry.CrossPolytope(tuple(args.axes)), _cfg(args))
    out = {"v1": v}
    return out, [out], True


def cmd_bound(args):
    prof = geometry.RadiiProfile(tuple(args.radii), args.allow_unsorted)
    b = geometry.mean_width_lower_bound(prof, _cfg(args))
    out = {"n": b.n, "bound_exact": b.bound_exact, "bound_corollary": b.bound_corollary,
           "corollary_defined": b.corollary_defined, "v1_cross_polytope": b.v1_cross_polytope,
           "e_n": b.e_n, "radii_norm": b.radii_norm}
    ok = not b.corollary_defined or b.bound_exact >= b.bound_corollary
    return out, [out], ok


def cmd_c_table(args):
    tab = geometry.constant_c_table(args.n_list, _cfg(args))
    rows = [{"n": n, "c_n": c, "median_route": m} for n, c, m in tab.rows]
    out = {"rows": rows, "argmin_n": tab.argmin_n, "min_c": tab.min_c,
           "largest_n": tab.largest_n, "c_at_largest": tab.c_at_largest,
           "below_1_74": tab.below_threshold}
    if args.data_out:
        write_xy(args.data_out, [r["n"] for r in rows], [r["c_n"] for r in rows], "n", "c_n")
    return out, rows, tab.all_above


def cmd_lemma1(args):
    xs = np.array(args.x)
    rows, ok = [], True
    for q in args.q:
        F = special.lemma1_F(xs[xs > 0], q) if np.any(xs > 0) else np.array([])
        f = special.lemma1_f(xs, q)
        Fi = iter(F)
        for x, fv in zip(xs, f):
            rows.append({"q": q, "x": x, "F": next(Fi) if x > 0 else None, "f": fv})
        inc = bool(np.all(np.diff(F) > 0)) if np.all(np.diff(xs[xs > 0]) > 0) else None
        pos = bool(np.all(f[xs > 0] > 0))
        ok &= inc is not False and pos
    return {"rows": rows, "all_ok": ok}, rows, ok


def cmd_lemma2(args):
    cfg = _cfg(args)
    rows = []
    for c in args.c:
        r = geometry.lemma2_check(c, cfg)
        rows.append({"c": c, "lhs": r.lhs, "rhs": r.rhs, "identity_residual": r.identity_residual,
                     "holds": r.holds})
    ok = all(r["holds"] and r["identity_residual"] <= 1e-8 for r in rows)
    return {"rows": rows, "all_ok": ok}, rows, ok


# parser --------------------------------------------------------------------------

def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", help="write the document here instead of stdout")
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--threads", type=int, default=1,
                        help="Monte Carlo substreams; never changes results")
    common.add_argument("--samples", type=int, default=10**6, help="Monte Carlo sample count")
    common.add_argument("--rel-tol", type=float, default=1e-10)
    common.add_argument("--abs-tol", type=float, default=1e-12)
    common.add_argument("--tail-epsilon", type=float, default=1e-13)

    parser = argparse.ArgumentParser(prog="gaussnorm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("expectation", cmd_expectation, "expected p-norm of u (.) xi")
    p.add_argument("--u", type=parse_vector, required=True)
    p.add_argument("--p", type=parse_real, default=math.inf)
    p.add_argument("--method", choices=["auto", "quadrature", "monte-carlo"], default="auto")

    p = add("ek-table", cmd_ek_table, "E_1..E_n with monotonicity check")
    p.add_argument("--n", type=int, required=True)

    p = add("ekq-table", cmd_ekq_table, "E_{k,q} for k = 1..n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=parse_real, required=True)

    p = add("median", cmd_median, "median of the sup-norm of n standard normals")
    p.add_argument("--n", type=parse_int_list, required=True)

    p = add("critical-residual", cmd_critical_residual, "Lagrange residual between u_i and u_j")
    p.add_argument("--u", type=parse_vector, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)

    p = add("r-rho", cmd_r_rho, "R(rho) and R'(rho)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=parse_vector, required=True)

    p = add("optimize", cmd_optimize, "extremise E||u (.) xi||_p over the l_q sphere")
    p.add_argument("--p", type=parse_real, default=math.inf)
    p.add_argument("--q", type=parse_real, default=2.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=["min", "max"], default="min")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--no-candidates", action="store_true")
    p.add_argument("--max-iter", type=int, default=landscape.MAX_ITER, help="iterations per start")

    p = add("landscape", cmd_landscape, "critical points on the l_q quarter circle (n=2)")
    p.add_argument("--p", type=parse_real, default=2.0)
    p.add_argument("--q", type=parse_real, required=True)
    p.add_argument("--grid-size", type=int, default=256)
    p.add_argument("--data-out", help="write plot-ready (theta, value) columns here")

    p = add("phase", cmd_phase, "threshold detection q_L, q_M, q_U")
    p.add_argument("--n2p2", action="store_true", help="two coordinates (p from --p, default 2)")
    p.add_argument("--p", type=parse_real, default=2.0)
    p.add_argument("--q-grid", type=parse_vector)
    p.add_argument("--grid-size", type=int, default=256)

    p = add("explore-qgt2", cmd_explore, "p=inf, q>2 exploration (reports only)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q-grid", type=parse_vector, required=True)
    p.add_argument("--starts", type=int, default=2)
    p.add_argument("--no-optimize", action="store_true")

    p = add("mc-norm", cmd_mc_norm, "Monte Carlo E||X||_p for X ~ N(0, cov)")
    p.add_argument("--cov", type=parse_matrix, required=True)
    p.add_argument("--p", type=parse_real, default=math.inf)

    p = add("sidak", cmd_sidak, "empirical Sidak inequality check")
    p.add_argument("--cov", type=parse_matrix)
    p.add_argument("--battery", action="store_true")
    p.add_argument("--t-grid", type=parse_vector)

    p = add("theorem2", cmd_theorem2, "bounds on E||X||_inf for trace-one covariances")
    p.add_argument("--cov", type=parse_matrix)
    p.add_argument("--random", type=parse_int_list, default=[2, 3, 4, 5, 6, 7, 8],
                   help="dimensions for random covariances")
    p.add_argument("--count", type=int, default=100)

    p = add("v1", cmd_v1, "first intrinsic volume of a cross-polytope")
    p.add_argument("--axes", type=parse_vector, required=True)

    p = add("bound", cmd_bound, "mean-width lower bound from inner radii")
    p.add_argument("--radii", type=parse_vector, required=True)
    p.add_argument("--allow-unsorted", action="store_true")

    p = add("c-table", cmd_c_table, "constants c_n = sqrt(2 pi n / log n) E_n")
    p.add_argument("--n-list", type=parse_int_list, default=list(range(2, 101)) + [200, 500, 1000])
    p.add_argument("--data-out", help="write plot-ready (n, c_n) columns here")

    p = add("lemma1", cmd_lemma1, "F(x) and f(x) on a grid")
    p.add_argument("--x", type=parse_vector, required=True)
    p.add_argument("--q", type=parse_vector, default=[2.0])

    p = add("lemma2", cmd_lemma2, "tail inequality and closed-form identity")
    p.add_argument("--c", type=parse_vector,
                   default=[round(0.1 * k, 10) for k in range(101)])
    return parser


def _inputs(args):
    skip = {"func", "format", "output", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None, stdout=None, stderr=None):
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        # argparse prints usage errors to sys.stderr; route them to the caller's stream
        with contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.seed is None:
        args.seed = _default_seed()
    if args.threads < 1 or args.samples < 1:
        print("error: --threads and --samples must be positive", file=stderr)
        return EXIT_USAGE
    try:
        results, table, passed = args.func(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except (DetectionError, GaussNormError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CHECK

    doc = {
        "command": args.command,
        "inputs": _inputs(args),
        "seed": args.seed,
        "versions": {"gaussnorm": __version__, "numpy": np.__version__,
                     "python": platform.python_version(), "backend": BACKEND},
        "status": "ok" if passed else "check-failed",
        "results": results,
    }
    text = to_json(doc) if args.format == "json" else to_csv(table)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK if passed else EXIT_CHECK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
