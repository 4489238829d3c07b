"""Command-line front end.

Commands::

    skorohod constant    --builtin square
    skorohod rate        --builtin square --n 4,8,16,32 --paths 100000 --out rate.csv
    skorohod exact-check --spec problem.json
    skorohod validate

Exit codes: 0 success, 2 parse error, 3 capacity error, 4 validation failure.
CSV output is byte-identical across runs for fixed flags and seed.
"""

from __future__ import annotations

import argparse
import sys

from .chaos import ChaosExpansion, apply_L, coefficients_constant
from .errors import CapacityError, ProblemParseError
from .experiment import (
    EvaluationPlan,
    RateStudyConfig,
    constant_C,
    drift_l2_integral,
    mc_error,
    rate_study,
)
from .problems import BUILTIN_NAMES, builtin_expansion, load_expansion, sine_truncation_tail
from .validation import run_validation

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAPACITY = 3
EXIT_VALIDATION = 4

EXACT_MC_THRESHOLD = 1e-10


def _add_problem_flags(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", metavar="FILE", help="problem definition file (JSON)")
    src.add_argument("--builtin", choices=BUILTIN_NAMES, help="bundled integrand")
    p.add_argument("--sine-degree", type=int, default=9,
                   help="truncation degree of the sine builtin (default 9)")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--paths", type=int, default=100_000, help="Monte Carlo paths per n")
    p.add_argument("--seed", type=int, default=20240701, help="base RNG seed")
    p.add_argument("--fine-factor", type=int, default=64,
                   help="fine quadrature cells per coarse cell (default 64)")
    p.add_argument("--workers", type=int, default=1,
                   help="worker threads; never affects the output values")


def _load(args) -> ChaosExpansion:
    if args.builtin:
        u = builtin_expansion(args.builtin, sine_degree=args.sine_degree)
        if args.builtin == "sine":
            tail = sine_truncation_tail(u.taus, args.sine_degree)
            print(f"sine truncation degree {args.sine_degree}, "
                  f"L2 tail {tail:.9g}")
        return u
    return load_expansion(args.spec)


def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ProblemParseError(f"--n expects comma-separated integers: {exc}") from exc
    if not values:
        raise ProblemParseError("--n must name at least one resolution")
    return values


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_constant(args) -> int:
    u = _load(args)
    integral = drift_l2_integral(u)
    print(f"integral of E[(L u)_s^2] ds = {_fmt(integral)}")
    print(f"C = {constant_C(u):.9g}")
    return EXIT_OK


def cmd_rate(args) -> int:
    u = _load(args)
    plan = EvaluationPlan(fine_factor=args.fine_factor)
    cfg = RateStudyConfig(u=u, n_list=_parse_n_list(args.n), paths=args.paths,
                          seed=args.seed, plan=plan)
    report = rate_study(cfg, workers=args.workers)
    lines = ["n,paths,e_n_hat,e_n_stderr,n_times_e_n,C_analytic,f_n_analytic,slope_running"]
    for row in report.rows:
        lines.append(",".join([
            str(row.n), str(row.paths), _fmt(row.e_hat), _fmt(row.stderr),
            _fmt(row.n_e_hat), _fmt(report.c_analytic), _fmt(row.f_n_analytic),
            _fmt(row.slope_running),
        ]))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(report.rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_exact_check(args) -> int:
    u = _load(args)
    by_coefficients = coefficients_constant(u)
    by_drift = apply_L(u).is_zero()
    plan = EvaluationPlan(fine_factor=16)
    e_hat, _ = mc_error(u, n=4, paths=512, seed=args.seed, plan=plan)
    by_simulation = e_hat <= EXACT_MC_THRESHOLD
    print(f"constant chaos coefficients : {'yes' if by_coefficients else 'no'}")
    print(f"drift operator vanishes     : {'yes' if by_drift else 'no'}")
    print(f"simulated e_4 = {e_hat:.3e} -> exact: {'yes' if by_simulation else 'no'}")
    if by_coefficients == by_drift == by_simulation:
        print(f"verdict: {'exactly simulable' if by_drift else 'not exactly simulable'}")
        return EXIT_OK
    print("verdict: INCONSISTENT (the three checks must agree)")
    return EXIT_VALIDATION


def cmd_validate(args) -> int:
    results = run_validation(args.seed)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.group}: {res.detail}")
        failed += 0 if res.passed else 1
    if failed:
        print(f"{failed} group(s) failed")
        return EXIT_VALIDATION
    print("all groups passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skorohod",
        description="Skorohod integrals of finite-chaos integrands: rate "
                    "constants, Monte Carlo error studies, exactness checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constant", help="print the limit constant C of n * e_n")
    _add_problem_flags(p)
    p.set_defaults(fn=cmd_constant)

    p = sub.add_parser("rate", help="Monte Carlo convergence study, CSV output")
    _add_problem_flags(p)
    _add_run_flags(p)
    p.add_argument("--n", default="4,8,16,32", help="comma-separated resolutions")
    p.add_argument("--out", metavar="FILE", help="CSV output path (default stdout)")
    p.set_defaults(fn=cmd_rate)

    p = sub.add_parser("exact-check", help="three-way exact-simulation verdict")
    _add_problem_flags(p)
    p.add_argument("--seed", type=int, default=20240701)
    p.set_defaults(fn=cmd_exact_check)

    p = sub.add_parser("validate", help="run the internal invariant suite")
    p.add_argument("--seed", type=int, default=20240701)
    p.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ProblemParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
