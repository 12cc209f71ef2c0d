"""Command-line front end.

Exit codes: 0 success, 1 solver or verification failure, 2 usage or
validation error.
"""
import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, output
from .errors import DomainError, InvalidParams, IsoprofileError
from .integrator import IntegratorOptions
from .model import make_params
from .shooting import ShootingOptions, assemble_closed_profile, classify, find_delta_star, sweep
from .verify import CHECKS, Context, format_table, run_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not (value > 0 and math.isfinite(value)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def _add_params(p, required=True):
    p.add_argument("--g", type=int, required=required, help="number of distinct principal curvatures")
    p.add_argument("--m1", type=int, required=required, help="multiplicity of the second largest curvature")
    p.add_argument("--m2", type=int, required=required, help="multiplicity of the largest curvature")


def _add_solver(p):
    p.add_argument("--horizon", type=_positive(float), default=200.0)
    p.add_argument("--rtol", type=_positive(float), default=1e-10)
    p.add_argument("--atol", type=_positive(float), default=1e-12)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isoprofile",
        description="Shooting, critical heights and closed profile curves for isoparametric foliations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="type of the trajectory from (0, delta, 0)")
    _add_params(p)
    _add_solver(p)
    p.add_argument("--delta", type=float, help="initial height")
    p.add_argument("--sweep", type=int, metavar="N",
                   help="classify N heights evenly spaced in (0.01, theta_star - 0.01)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--output", type=Path)

    p = sub.add_parser("find-delta-star", help="bisection for the critical height")
    _add_params(p)
    _add_solver(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", type=Path)

    p = sub.add_parser("close", help="assemble the closed profile curve and write CSV/JSON and SVG")
    _add_params(p)
    _add_solver(p)
    p.add_argument("--tol", type=float, default=1e-8, help="bisection tolerance for delta*")
    p.add_argument("--delta-star", type=float, help="skip the search and use this height")
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--phi1", type=float, help="foliation angle of the largest curvature")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", type=Path, default=Path("profile.csv"))
    p.add_argument("--svg", type=Path, help="plot path (default: output with .svg suffix)")

    p = sub.add_parser("verify", help="run the self-check suite")
    _add_params(p, required=False)
    p.add_argument("--only", action="append", choices=sorted(CHECKS), help="run only this check")
    p.add_argument("--n", type=int, help="dimension parameter for the linear-analysis checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _params(args):
    return make_params(args.g, args.m1, args.m2)


def _shooting_opts(args):
    return ShootingOptions(IntegratorOptions(rel_tol=args.rtol, abs_tol=args.atol, horizon=args.horizon,
                                             event_tol=min(1e-12, args.rtol)))


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def cmd_classify(args):
    params = _params(args)
    opts = _shooting_opts(args)
    if args.sweep is not None:
        if args.sweep < 2:
            raise UsageError("--sweep needs at least 2 points")
        deltas = np.linspace(0.01, params.theta_star - 0.01, args.sweep)
        results = sweep(params, deltas, opts, args.workers)
        _emit(output.typemap_csv(results), args.output)
        return EXIT_OK
    if args.delta is None:
        raise UsageError("classify needs --delta or --sweep")
    res = classify(params, args.delta, opts)
    if args.format == "json":
        _emit(output.dumps(output.classify_record(params, res)), args.output)
    elif args.format == "csv":
        _emit(output.typemap_csv([res]), args.output)
    else:
        st = res.terminal_state
        lines = [
            f"{res.verdict}",
            f"delta          {output.fmt(res.delta)}",
            f"witness_time   {output.fmt(res.witness_time) or '-'}",
            f"terminal_state xi={st.xi:.12g} theta={st.theta:.12g} alpha={st.alpha:.12g}",
            f"residuals      |xi|={res.witness_residuals['xi']:.3e} "
            f"alpha_to_pi={res.witness_residuals['alpha']:.3e}",
        ]
        if res.evidence is not None:
            ev = res.evidence
            lines.append(f"evidence       theta_gap={ev.theta_gap:.3e} alpha_gap={ev.alpha_gap:.3e} "
                         f"xi_rate={ev.xi_rate:.3e} xi_variation={ev.xi_variation:.3e}")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _check_tol(tol):
    if not (tol >= 1e-12 and math.isfinite(tol)):
        raise UsageError(f"--tol must be at least 1e-12, got {tol}")


def cmd_find_delta_star(args):
    params = _params(args)
    _check_tol(args.tol)
    res = find_delta_star(params, args.tol, _shooting_opts(args))
    if args.format == "json":
        _emit(output.dumps(output.delta_star_record(params, res)), args.output)
        return EXIT_OK
    lines = [f"delta_star {output.fmt(res.delta_star)}",
             f"bracket    [{output.fmt(res.bracket[0])}, {output.fmt(res.bracket[1])}]",
             f"iterations {res.iterations}",
             f"types      {res.boundary_types[0].verdict} / {res.boundary_types[1].verdict}",
             "history"]
    lines += [f"  {k:3d} [{lo:.15f}, {hi:.15f}]" for k, (lo, hi) in enumerate(res.history)]
    lines += [f"warning    {w}" for w in res.warnings]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_close(args):
    params = _params(args)
    opts = _shooting_opts(args)
    if args.samples < 3:
        raise UsageError("--samples must be at least 3")
    if args.delta_star is None:
        _check_tol(args.tol)
        delta_star = find_delta_star(params, args.tol, opts).delta_star
    else:
        delta_star = args.delta_star
    prof = assemble_closed_profile(params, delta_star, opts, args.samples, phi1=args.phi1)
    if args.format == "json":
        args.output.write_text(output.dumps(output.profile_record(prof)))
    else:
        args.output.write_text(output.profile_csv(prof))
    svg = args.svg or args.output.with_suffix(".svg")
    svg.write_text(output.profile_svg(prof))
    ce = prof.closure_error
    print(f"delta_star     {output.fmt(prof.delta_star)}")
    print(f"period         {output.fmt(prof.period)}")
    print(f"closure_error  xi={ce[0]:.3e} theta={ce[1]:.3e} alpha={ce[2]:.3e}")
    print(f"alpha_mismatch {prof.alpha_mismatch:.3e}")
    print(f"simple         {'yes' if prof.is_simple else f'no ({prof.crossings} crossings)'}")
    print(f"wrote          {args.output} {svg}")
    return EXIT_OK


def cmd_verify(args):
    given = [v is not None for v in (args.g, args.m1, args.m2)]
    if any(given) and not all(given):
        raise UsageError("--g, --m1 and --m2 go together")
    ctx = Context(_params(args) if all(given) else None, args.n, args.seed)
    results = run_checks(args.only, ctx)
    print(format_table(results))
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


COMMANDS = {
    "classify": cmd_classify,
    "find-delta-star": cmd_find_delta_star,
    "close": cmd_close,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParams, DomainError, TypeError) as exc:
        print(f"isoprofile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IsoprofileError, ArithmeticError) as exc:
        print(f"isoprofile: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"isoprofile: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
