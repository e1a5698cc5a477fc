"""Command-line interface.

Exit status: 0 success, 1 parse or numeric error, 2 hypothesis hard failure,
3 dominance violation (strict mode) or a failed reproduction/reduction check.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from contextlib import contextmanager
from dataclasses import replace
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .bounds import DEFAULT_OPTIONS, BoundEvaluator, BoundOptions, bound_curve
from .core import check_hypotheses
from .examples import example
from .expr import ExprDomainError
from .numerics import InversionError, QuadratureConfig, QuadratureError, max_relative_deviation, uniform_abscissae
from .problemfile import ProblemFile, ProblemFileError, load_problem_file
from .verifier import Mode, Reduction, SolverError, check_dominance, check_reduction, default_mode, solve_saturated

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HYPOTHESIS = 2
EXIT_CHECK_FAILED = 3

DEFAULT_GRID = 129
REPRODUCE_TOL = 1e-6
REDUCTION_TOL = 1e-6

NUMERIC_ERRORS = (ArithmeticError, InversionError, ValueError)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def _error(exc: BaseException) -> int:
    if isinstance(exc, OverflowError):
        _diag(f"error: floating-point overflow ({exc}); the bound or solution exceeds double range")
    else:
        _diag(f"error: {exc}")
    return EXIT_ERROR


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def write_csv(path: str, header: Sequence[str], columns: Iterable[np.ndarray]) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*cols):
        w.writerow([_fmt(v) for v in row])
    with _output(path) as fh:
        fh.write(buf.getvalue())


def read_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)


# --------------------------------------------------------------------------
# Option resolution: command-line flag > problem file > default
# --------------------------------------------------------------------------


def _opt(args, name):
    return getattr(args, name, None)


def resolve_options(args, pf: ProblemFile | None = None) -> BoundOptions:
    ns = pf.numerics if pf else None

    def pick(flag, key, default):
        v = _opt(args, flag)
        if v is None and ns is not None:
            v = getattr(ns, key)
        return default if v is None else v

    base = DEFAULT_OPTIONS
    quad = QuadratureConfig(
        abs_tol=pick("tol_abs", "abs_tol", base.quad.abs_tol),
        rel_tol=pick("tol_rel", "rel_tol", base.quad.rel_tol),
        max_depth=base.quad.max_depth,
    )
    return replace(
        base,
        quad=quad,
        zeta6_denominator=pick("zeta6_denom", "zeta6_denominator", base.zeta6_denominator),
        strict_limits=bool(pick("strict_limits", "strict_limits", base.strict_limits)),
        cushion=pick("cushion", "cushion", base.cushion),
    )


def resolve_grid(args, pf: ProblemFile | None = None, default: int = DEFAULT_GRID) -> int:
    n = _opt(args, "grid")
    if n is None and pf is not None:
        n = pf.numerics.grid
    return default if n is None else n


def resolve_mode(args, pf: ProblemFile) -> Mode:
    m = _opt(args, "dominance") or pf.numerics.dominance
    return default_mode(pf.theorem) if m is None else Mode.parse(m)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _load(path: str) -> ProblemFile | None:
    try:
        return load_problem_file(path)
    except ProblemFileError as exc:
        _diag(f"error: {exc}")
        return None


def _report_hypotheses(pf: ProblemFile):
    rep = check_hypotheses(pf.problem, pf.theorem)
    for h in rep.hard_failures + rep.warnings:
        where = "" if h.first_failure is None else f" (first failure at delta={h.first_failure:.6g})"
        kind = "hypothesis failed" if h in rep.hard_failures else "warning"
        _diag(f"{kind}: {h.name}{where}{': ' + h.detail if h.detail else ''}")
    return rep


def cmd_eval(args) -> int:
    pf = _load(args.file)
    if pf is None:
        return EXIT_ERROR
    if not _report_hypotheses(pf).ok:
        return EXIT_HYPOTHESIS
    try:
        opts = resolve_options(args, pf)
        curve = bound_curve(pf.problem, pf.theorem, resolve_grid(args, pf), opts)
    except NUMERIC_ERRORS as exc:
        return _error(exc)
    v = curve.values
    _diag(f"{pf.theorem.value}: bound min {_fmt(v.min())}, max {_fmt(v.max())} over {len(v)} points")
    write_csv(args.output, ("delta", "value"), (curve.delta, v))
    return EXIT_OK


def cmd_verify(args) -> int:
    pf = _load(args.file)
    if pf is None:
        return EXIT_ERROR
    rep = _report_hypotheses(pf)
    if not rep.ok:
        return EXIT_HYPOTHESIS
    try:
        opts = resolve_options(args, pf)
        n = resolve_grid(args, pf)
        mode = resolve_mode(args, pf)
        curve = bound_curve(pf.problem, pf.theorem, n, opts)
        traj = solve_saturated(pf.problem, pf.theorem, n, extrapolate=True)
        report = check_dominance(traj, curve, mode, tuple(h.name for h in rep.warnings))
    except (SolverError, *NUMERIC_ERRORS) as exc:
        return _error(exc)
    _diag(f"{pf.theorem.value}: saturated solution converged in {traj.iterations} sweeps")
    _diag(report.summary())
    write_csv(
        args.output,
        ("delta", "value", "u_sat", "margin"),
        (report.delta, report.bound, report.u, report.margins),
    )
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def cmd_reproduce(args) -> int:
    ex = example(args.example)
    opts = resolve_options(args)
    xs = uniform_abscissae(ex.lo, ex.hi, ex.points)
    try:
        ev = BoundEvaluator(ex.problem, ex.theorem, opts, span=ex.hi)
        pipeline = np.array([ev(float(x)) for x in xs])
    except NUMERIC_ERRORS as exc:
        return _error(exc)
    closed = np.array([ex.closed_form(float(x)) for x in xs])
    rel = np.abs(pipeline - closed) / np.abs(closed)
    worst = max_relative_deviation(pipeline, closed)
    ok = worst <= REPRODUCE_TOL
    _diag(f"example {ex.number}: max relative difference {worst:.3g} ({'ok' if ok else 'FAILED'}, tol {REPRODUCE_TOL:g})")
    write_csv(args.output, ("delta", "pipeline_bound", "closedform_bound", "rel_diff"), (xs, pipeline, closed, rel))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_reductions(args) -> int:
    opts = resolve_options(args)
    xs = uniform_abscissae(0.0, 1.0, 33)
    out = [f"{'reduction':<16} {'theorem':<12} {'oracle':<28} {'max_rel_dev':>12} {'dominates':>9}  result"]
    failed = []
    for r in Reduction:
        try:
            rep = check_reduction(r, xs, REDUCTION_TOL, opts)
        except NUMERIC_ERRORS as exc:
            _diag(f"{r.value}: {exc}")
            out.append(f"{r.value:<16} {'':<12} {'':<28} {'':>12} {'':>9}  error")
            failed.append(r.value)
            continue
        out.append(
            f"{rep.reduction:<16} {rep.theorem:<12} {rep.oracle:<28} {rep.max_rel_dev:>12.3e} "
            f"{'yes' if rep.general_dominates else 'no':>9}  {'pass' if rep.passed else 'FAIL'}"
        )
        if not rep.passed:
            failed.append(rep.reduction)
    print("\n".join(out))
    if failed:
        _diag(f"{len(failed)} of {len(Reduction)} reductions exceed {REDUCTION_TOL:g}: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_hypotheses(args) -> int:
    pf = _load(args.file)
    if pf is None:
        return EXIT_ERROR
    rep = check_hypotheses(pf.problem, pf.theorem)
    print(f"{pf.theorem.value} on [0, {_fmt(pf.problem.horizon)}]")
    print("\n".join(rep.lines()))
    return EXIT_OK if rep.ok else EXIT_HYPOTHESIS


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    g = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g.add_argument("--tol-abs", type=_positive_float, help="absolute quadrature tolerance")
    g.add_argument("--tol-rel", type=_positive_float, help="relative quadrature tolerance")
    g.add_argument("--grid", type=_positive_int, help="number of grid points")
    g.add_argument("--strict-limits", action="store_const", const=True, help="use the lower limits exactly as printed")
    g.add_argument("--zeta6-denom", choices=("gamma1", "gamma3"), help="denominator in the zeta6 constant")
    g.add_argument("--dominance", choices=("strict", "report-only"), help="dominance failure policy")
    return g


def build_parser() -> argparse.ArgumentParser:
    flags = _global_flags()
    parser = argparse.ArgumentParser(
        prog="retarded-bounds",
        description="Explicit bounds for retarded Gronwall-Bellman-Pachpatte inequalities.",
        parents=[flags],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[flags], help="evaluate the bound curve of a problem file")
    p.add_argument("file")
    p.add_argument("-o", "--output", default="-", help="CSV path, '-' for standard output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", parents=[flags], help="compare the bound with the saturated solution")
    p.add_argument("file")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", parents=[flags], help="compare a built-in example with its closed form")
    p.add_argument("example", type=int, choices=(1, 2))
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("reductions", parents=[flags], help="check the classical reductions")
    p.set_defaults(func=cmd_reductions)

    p = sub.add_parser("hypotheses", parents=[flags], help="check the hypotheses of a problem file")
    p.add_argument("file")
    p.set_defaults(func=cmd_hypotheses)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExprDomainError as exc:
        _diag(f"error: {exc}")
        return EXIT_ERROR
    except QuadratureError as exc:
        _diag(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
