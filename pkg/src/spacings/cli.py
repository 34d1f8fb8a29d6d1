"""Command-line front end.

Every subcommand builds an envelope ``{command, parameters, results,
artifact_version, precision_bits, seed}`` and prints it as JSON (the default
when stdout is not a terminal), CSV rows, or an aligned text table.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import mpmath

from . import __version__
from .asymptotics import (
    CONVERGENCE_FIELDS,
    convergence_table,
    determinacy_check,
    limit_cumulants,
    limit_moments,
)
from .exactdist import (
    QUANTILE_PRECISION,
    QUANTILE_TOLERANCE,
    cdf,
    cdf_real,
    kth_gap_mean,
    moment_exact,
    pdf,
    quantile,
    raw_moments_real,
)
from .harmonic import EXACT_N_LIMIT
from .montecarlo import (
    DEFAULT_BINS,
    DEFAULT_RANGE,
    MAX_SIM_MOMENT,
    SAMPLERS,
    draw,
    min_gap_limit_test,
    sampler_equivalence,
    summarize,
)
from .numerics import (
    default_precision,
    format_rational,
    format_real,
    fraction_to_decimal,
    rational_to_real,
)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from exc
    return lo, hi


def _decimal(q: Fraction, digits: int) -> str:
    return fraction_to_decimal(q, digits)


def _real(x, prec: int) -> str:
    return format_real(x, prec)


# -- subcommands -------------------------------------------------------------
# each returns (results, rows, columns, seed)

def cmd_moment(args):
    if args.n < 2 or args.m < 1:
        raise UsageError("moment needs --n >= 2 and --m >= 1")
    orders = range(args.m, args.m + 1) if args.m_max is None else range(1, args.m_max + 1)
    rows = []
    for m in orders:
        if args.float:
            raw = raw_moments_real(args.n, m, args.precision + 16)[m]
            with mpmath.workprec(args.precision):
                value = _real(raw / args.n**m, args.precision)
            rows.append({"n": args.n, "m": m, "value": value, "decimal": value})
        else:
            q = moment_exact(args.n, m)
            rows.append({"n": args.n, "m": m, "value": format_rational(q),
                         "decimal": _decimal(q, args.digits)})
    results = rows[0] if len(rows) == 1 else {"rows": rows}
    return results, rows, ["n", "m", "value", "decimal"], None


def _grid_points(n: int, count: int) -> list[Fraction]:
    if count < 2:
        raise UsageError("--grid needs at least 2 points")
    lo = Fraction(1, n)
    return [lo + (1 - lo) * Fraction(i, count - 1) for i in range(count)]


def _law_rows(args, exact_fn, real_fn):
    if args.n < 2:
        raise UsageError("need --n >= 2")
    if (args.x is None) == (args.grid is None):
        raise UsageError("give exactly one of --x or --grid")
    xs = [args.x] if args.x is not None else _grid_points(args.n, args.grid)
    rows = []
    for x in xs:
        if args.float:
            value = _real(real_fn(args.n, x, args.precision), args.precision)
            rows.append({"n": args.n, "x": format_rational(x), "value": value, "decimal": value})
        else:
            q = exact_fn(args.n, x)
            rows.append({"n": args.n, "x": format_rational(x), "value": format_rational(q),
                         "decimal": _decimal(q, args.digits)})
    results = rows[0] if len(rows) == 1 else {"rows": rows}
    return results, rows, ["n", "x", "value", "decimal"], None


def cmd_cdf(args):
    return _law_rows(args, cdf, cdf_real)


def _pdf_real(n, x, prec):
    return rational_to_real(pdf(n, x), prec)


def cmd_pdf(args):
    return _law_rows(args, pdf, _pdf_real)


def cmd_quantile(args):
    if not args.precision_given:
        args.precision = QUANTILE_PRECISION  # recorded in the envelope for replay
    prec = args.precision
    x = quantile(args.n, args.p, args.tolerance, prec)
    row = {"n": args.n, "p": format_rational(args.p), "value": _real(x, prec)}
    return row, [row], ["n", "p", "value"], None


def cmd_kth_gap(args):
    ks = [args.k] if args.k is not None else range(1, args.n + 1)
    rows = []
    for k in ks:
        q = kth_gap_mean(args.n, k)
        rows.append({"n": args.n, "k": k, "value": format_rational(q),
                     "decimal": _decimal(q, args.digits)})
    results = rows[0] if len(rows) == 1 else {"rows": rows}
    return results, rows, ["n", "k", "value", "decimal"], None


def cmd_verify(args):
    checks = run_suite(args.suite, args.n_max, args.m_max, args.samples, args.seed)
    # timings stay out of the envelope so a replay reproduces it exactly
    rows = [{k: v for k, v in c.to_dict().items() if k != "seconds"} for c in checks]
    results = {"suite": args.suite, "passed": all(c.passed for c in checks), "checks": rows}
    table = [{"check": r["name"], "passed": r["passed"], "total": r["total"],
              "failed": r["failed"], "first_failure": json.dumps(r["first_failure"])}
             for r in rows]
    return results, table, ["check", "passed", "total", "failed", "first_failure"], args.seed


def cmd_converge(args):
    rows = convergence_table(args.ns, args.m_max, args.precision, args.exact_limit)
    prec = args.precision
    out = []
    for r in rows:
        out.append({f: (getattr(r, f) if f in ("n", "m") else _real(getattr(r, f), prec))
                    for f in CONVERGENCE_FIELDS})
    limits = {"mu": [_real(v, prec) for v in limit_moments(args.m_max, prec)],
              "kappa": [_real(v, prec) for v in limit_cumulants(args.m_max, prec)]}
    return {"rows": out, "limits": limits}, out, list(CONVERGENCE_FIELDS), None


def cmd_limits(args):
    prec = args.precision
    mu = limit_moments(args.m_max, prec)
    kappa = limit_cumulants(args.m_max, prec)
    rows = [{"m": m, "mu": _real(mu[m - 1], prec), "kappa": _real(kappa[m - 1], prec)}
            for m in range(1, args.m_max + 1)]
    results = {"mu": [r["mu"] for r in rows], "kappa": [r["kappa"] for r in rows]}
    if args.determinacy:
        results["determinacy"] = [
            {"m": d.m, "value": _real(d.value, prec), "bound": _real(d.bound, prec), "holds": d.holds}
            for d in determinacy_check(args.determinacy, prec)
        ]
    return results, rows, ["m", "mu", "kappa"], None


def cmd_simulate(args):
    if not 1 <= args.max_moment <= MAX_SIM_MOMENT:
        raise UsageError(f"--max-moment must be in [1, {MAX_SIM_MOMENT}]")
    if args.bins < 1 or not args.range[0] < args.range[1]:
        raise UsageError("histogram needs --bins >= 1 and LO < HI")
    kth = tuple(args.k or ())
    draws = draw(args.n, args.trials, args.seed, args.workers, args.sampler, kth)
    summary = summarize(draws, args.n, args.trials, args.seed, args.workers, args.sampler,
                        args.max_moment, args.bins, args.range)
    results = summary.to_dict()
    rows = []
    exact = None
    if args.n <= EXACT_N_LIMIT:
        exact = [float(moment_exact(args.n, m)) for m in range(1, args.max_moment + 1)]
        results["exact_moments"] = exact
    for m in range(1, args.max_moment + 1):
        emp, se = summary.moments[m - 1], summary.moment_stderr[m - 1]
        row = {"order": m, "empirical": emp, "stderr": se}
        if exact:
            row["exact"] = exact[m - 1]
            row["z"] = (emp - exact[m - 1]) / se if se > 0 else 0.0
        rows.append(row)
    if args.check == "min-gap":
        table = min_gap_limit_test(args.n, args.trials, args.seed, args.workers, draws=draws)
        results["min_gap"] = [
            {"t": r.t, "empirical": r.empirical, "exponential": r.exponential,
             "finite_n": r.finite_n, "sigma": r.sigma,
             "z_exponential": r.z_exponential, "z_finite": r.z_finite}
            for r in table
        ]
    if args.check == "sampler":
        ks = sampler_equivalence(args.n, args.trials, args.seed, args.workers)
        results["sampler_ks"] = {"statistic": ks.statistic, "critical": ks.critical,
                                 "alpha": ks.alpha, "passed": ks.passed}
    columns = ["order", "empirical", "stderr"] + (["exact", "z"] if exact else [])
    return results, rows, columns, args.seed


# -- parser ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, precision: bool = True) -> None:
    p.add_argument("--out", choices=("json", "csv", "table"), default=None,
                   help="output format (default: table on a terminal, json otherwise)")
    if precision:
        p.add_argument("--precision", type=int, default=None,
                       help="working precision in bits (default $SPACINGS_PRECISION_BITS or 256)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spacings", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moment", help="E[d_max^m], exact by default")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--m-max", type=int, default=None, help="emit orders 1..M instead of --m alone")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--float", action="store_true")
    p.add_argument("--digits", type=int, default=30)
    _common(p)
    p.set_defaults(func=cmd_moment)

    for name, func, what in (("cdf", cmd_cdf, "P(d_max <= x)"), ("pdf", cmd_pdf, "density of d_max")):
        p = sub.add_parser(name, help=what)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--x", type=_fraction, default=None, help="point, e.g. 1/2 or 0.05")
        p.add_argument("--grid", type=int, default=None, help="equally spaced points on [1/n, 1]")
        p.add_argument("--float", action="store_true", help="rounded instead of exact values")
        p.add_argument("--digits", type=int, default=30)
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("quantile", help="inverse cdf by bisection")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=_fraction, required=True)
    p.add_argument("--tolerance", type=float, default=QUANTILE_TOLERANCE)
    _common(p)
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("kth-gap", help="mean of the k-th largest gap")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="default: all k = 1..n")
    p.add_argument("--digits", type=int, default=30)
    _common(p, precision=False)
    p.set_defaults(func=cmd_kth_gap)

    p = sub.add_parser("verify", help="exact identity and proof-chain checks")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--samples", type=int, default=100, help="random tuples for the quadrature check")
    p.add_argument("--seed", type=int, default=1)
    _common(p, precision=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converge", help="finite-n moments of n d_max - log n against Gumbel limits")
    p.add_argument("--ns", type=_int_list, default=[100, 1000, 10000])
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--exact-limit", type=int, default=EXACT_N_LIMIT,
                   help="largest n handled with exact rationals")
    _common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("limits", help="limiting moments mu_m and cumulants kappa_m")
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--determinacy", type=int, default=0, metavar="M",
                   help="also report the moment-determinacy bound for m <= M")
    _common(p)
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("simulate", help="Monte Carlo summary of d_max and d_min")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-moment", type=int, default=4)
    p.add_argument("--sampler", choices=SAMPLERS, default="expgap")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--range", type=_range, default=DEFAULT_RANGE, metavar="LO:HI",
                   help="histogram range for n d_max - log n")
    p.add_argument("--k", type=int, action="append", help="track the k-th largest gap (repeatable)")
    p.add_argument("--check", choices=("none", "min-gap", "sampler"), default="none")
    _common(p, precision=False)
    p.set_defaults(func=cmd_simulate)
    return parser


# -- output ------------------------------------------------------------------

def _parameters(args) -> dict:
    skip = {"func", "out", "command", "precision_given"}
    params = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        if isinstance(value, Fraction):
            value = format_rational(value)
        elif isinstance(value, tuple):
            value = list(value)
        params[key] = value
    return params


def envelope(args, results, seed) -> dict:
    return {
        "command": args.command,
        "parameters": _parameters(args),
        "results": results,
        "artifact_version": __version__,
        "precision_bits": getattr(args, "precision", None),
        "seed": seed,
    }


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(env: dict, rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(env, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _cell(row.get(c, "")) for c in columns})
        return buf.getvalue()
    cells = [[_cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def run(argv=None) -> tuple[int, dict | None, str]:
    """Parse and execute; returns (exit code, envelope, rendered output)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "precision"):
        args.precision_given = args.precision is not None
        if args.precision is None:
            args.precision = default_precision()
        if args.precision < 64:
            raise UsageError("--precision must be at least 64 bits")
    results, rows, columns, seed = args.func(args)
    env = envelope(args, results, seed)
    fmt = args.out or ("table" if sys.stdout.isatty() else "json")
    code = EXIT_OK
    if args.command == "verify" and not results["passed"]:
        code = EXIT_FAILED
    return code, env, render(env, rows, columns, fmt)


def replay_argv(env: dict) -> list[str]:
    """Command line that reproduces an envelope's payload."""
    argv = [env["command"]]
    for key, value in env["parameters"].items():
        flag = "--" + key.replace("_", "-")
        if value is None or value is False:
            continue
        if value is True:
            if key == "exact":
                continue
            argv.append(flag)
        elif key == "range":
            argv.append(f"{flag}={value[0]}:{value[1]}")
        elif key == "ns":
            argv += [flag, ",".join(str(v) for v in value)]
        elif key == "k" and isinstance(value, list):
            for v in value:
                argv += [flag, str(v)]
        else:
            argv += [flag, str(value)]
    if env.get("precision_bits") is not None and "--precision" not in argv:
        argv += ["--precision", str(env["precision_bits"])]
    return argv + ["--out", "json"]


def main(argv=None) -> int:
    try:
        code, _, text = run(argv)
    except (UsageError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        sys.stdout.write(text)
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error for us
        sys.stderr.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
