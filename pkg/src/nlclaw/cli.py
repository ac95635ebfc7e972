"""Command line surface.

Subcommands:

    nlclaw run <scenario>       solve one scenario file
    nlclaw sweep <scenario>     epsilon sweep (file must set epsilon_list)
    nlclaw riemann --uL --uR    Riemann problem straight from flags
    nlclaw euler <scenario>     isentropic Euler scenario (mode = euler)
    nlclaw verify <scenario>    diagnostics only, no snapshot files
    nlclaw selftest             acceptance battery (subset via --criteria)

Exit status everywhere: 0 success, 1 input error, 2 check failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .runner import EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK, run, run_file
from .scenario import (
    FluxChoice,
    RiemannSpec,
    ScenarioError,
    ScenarioSpec,
    parse_scenario,
)

__all__ = ["main"]


def _add_outdir(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--outdir", default=".", help="directory for result files"
    )


def _parse_file(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        print(f"cannot read {path}: {e}", file=sys.stderr)
        return None
    try:
        return parse_scenario(text)
    except ScenarioError as e:
        for msg in e.errors:
            print(f"{path}: {msg}", file=sys.stderr)
        return None


def _cmd_run(args) -> int:
    return run_file(args.scenario, args.outdir)


def _cmd_sweep(args) -> int:
    spec = _parse_file(args.scenario)
    if spec is None:
        return EXIT_INPUT_ERROR
    if spec.epsilon_list is None:
        print(
            f"{args.scenario}: sweep needs epsilon_list in the scenario",
            file=sys.stderr,
        )
        return EXIT_INPUT_ERROR
    return run(spec, args.outdir)


def _cmd_verify(args) -> int:
    return run_file(args.scenario, args.outdir, verify_only=True)


def _cmd_euler(args) -> int:
    spec = _parse_file(args.scenario)
    if spec is None:
        return EXIT_INPUT_ERROR
    if spec.mode != "euler":
        print(
            f"{args.scenario}: euler subcommand needs mode = euler",
            file=sys.stderr,
        )
        return EXIT_INPUT_ERROR
    return run(spec, args.outdir)


def _cmd_riemann(args) -> int:
    if args.domain is not None:
        domain = tuple(args.domain)
        if domain[0] >= domain[1]:
            print("--domain must satisfy a < b", file=sys.stderr)
            return EXIT_INPUT_ERROR
    else:
        m = max(abs(args.uL), abs(args.uR), 1.0)
        speed = m if args.flux == "burgers" else m * m
        reach = 1.0 + speed * args.T
        domain = (-reach, reach)
    if args.T <= 0 or args.dx <= 0 or args.epsilon <= 0:
        print("--T, --dx, --epsilon must be positive", file=sys.stderr)
        return EXIT_INPUT_ERROR
    spec = ScenarioSpec(
        name=args.name,
        mode=args.mode,
        initial=RiemannSpec(args.uL, args.uR),
        T=args.T,
        dx=args.dx,
        domain=domain,
        flux=FluxChoice(args.flux),
        epsilon=args.epsilon,
        stride=args.stride,
    )
    return run(spec, args.outdir)


def _cmd_selftest(args) -> int:
    from .acceptance import parse_criteria_arg, run_criteria, write_results

    try:
        numbers = parse_criteria_arg(args.criteria)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT_ERROR
    results = run_criteria(numbers)
    for r in results:
        print(r.line())
    write_results(results, Path(args.outdir))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="nlclaw",
        description="nonlocal transport regularisations of scalar "
        "conservation laws: solvers, references, and checks",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one scenario file")
    p.add_argument("scenario", help="scenario file path")
    _add_outdir(p)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="epsilon sweep of a scenario file")
    p.add_argument("scenario", help="scenario file with epsilon_list")
    _add_outdir(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("riemann", help="Riemann problem from flags")
    p.add_argument("--uL", type=float, required=True)
    p.add_argument("--uR", type=float, required=True)
    p.add_argument(
        "--flux", choices=("burgers", "cubic"), default="burgers"
    )
    p.add_argument(
        "--mode",
        choices=("nn", "velocity_reg", "flux_reg", "conservative"),
        default="nn",
    )
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--dx", type=float, default=1e-3)
    p.add_argument(
        "--domain", type=float, nargs=2, metavar=("A", "B"), default=None
    )
    p.add_argument("--stride", type=int, default=25)
    p.add_argument("--name", default="riemann")
    _add_outdir(p)
    p.set_defaults(fn=_cmd_riemann)

    p = sub.add_parser("euler", help="isentropic Euler scenario")
    p.add_argument("scenario", help="scenario file with mode = euler")
    _add_outdir(p)
    p.set_defaults(fn=_cmd_euler)

    p = sub.add_parser("verify", help="diagnostics only, no snapshots")
    p.add_argument("scenario", help="scenario file path")
    _add_outdir(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("selftest", help="run the acceptance battery")
    p.add_argument(
        "--criteria",
        default=None,
        help="comma-separated criterion numbers (default: all)",
    )
    _add_outdir(p)
    p.set_defaults(fn=_cmd_selftest)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
