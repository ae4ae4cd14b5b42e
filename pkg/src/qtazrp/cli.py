"""Command-line front end: ``qtazrp {prob,step-prob,oracle,simulate,verify}``.

Numeric results go to stdout as JSON lines (or CSV with ``--csv``); the
human-readable summary and log messages go to stderr. States are written
as comma-separated integers in descending order; a state with a negative
first coordinate needs the ``--from=-1,-2`` form.

Exit codes: 0 ok, 1 usage or invalid input, 2 non-convergence,
3 state-space cap exceeded, 4 failed verification.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from qtazrp.errors import NonConvergence, PoleError, StateSpaceTooLarge
from qtazrp.io import checks_to_frame, export_results, load_rate_profile, records_to_frame
from qtazrp.models import (
    DEFAULT_MAX_NODES,
    DEFAULT_NODES,
    DEFAULT_TOL,
    Comparison,
    ContourOptions,
    Estimate,
    ReportRecord,
    RunReport,
    SimConfig,
    StateVector,
    TransitionRequest,
)
from qtazrp.montecarlo import sample_states
from qtazrp.oracle import DEFAULT_EPS, oracle_distribution
from qtazrp.transition import step_init_prob, transition_probability
from qtazrp.verify import SUITES, oracle_tolerance, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGENCE = 2
EXIT_RESOURCE = 3
EXIT_VERIFY = 4

CROSS_CHECK_TOL = 1e-8


class _Parser(argparse.ArgumentParser):
    """argparse reports usage errors with status 2, which here means non-convergence."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _state(text: str) -> StateVector:
    try:
        return StateVector.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc).splitlines()[0]) from exc


def _common_options() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--csv", action="store_true", help="write CSV to stdout instead of JSON lines")
    common.add_argument("--excel", type=Path, metavar="FILE", help="also write the result table as xlsx")
    common.add_argument("--report", type=Path, metavar="FILE", help="write the full run report as JSON")
    common.add_argument("--threads", type=int, default=1, help="worker cap for quadrature and simulation")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="stderr logging threshold",
    )
    return common


def _rates_option() -> argparse.ArgumentParser:
    rates = _Parser(add_help=False)
    rates.add_argument(
        "--rates", type=Path, required=True, metavar="FILE", help="JSON rates file (q and conductances)"
    )
    return rates


def _contour_options() -> argparse.ArgumentParser:
    contour = _Parser(add_help=False)
    contour.add_argument("--radius-scale", type=float, default=1.0, help="multiplier on the automatic radius")
    contour.add_argument("--radius", type=float, help="explicit contour radius (overrides --radius-scale)")
    contour.add_argument("--nodes", type=int, default=DEFAULT_NODES, help="initial nodes per variable")
    contour.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES, help="node-doubling limit")
    contour.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative convergence tolerance")
    contour.add_argument(
        "--allow-unconverged",
        action="store_true",
        help="report unconverged integrals instead of failing (exit status is still 2)",
    )
    return contour


def build_parser() -> argparse.ArgumentParser:
    common, rates, contour = _common_options(), _rates_option(), _contour_options()
    parser = _Parser(prog="qtazrp", description="Transition probabilities of the inhomogeneous q-TAZRP.")
    commands = parser.add_subparsers(dest="command", required=True)

    prob = commands.add_parser(
        "prob", parents=[common, rates, contour], help="P_Y(X; t) from the contour formula"
    )
    prob.add_argument("--from", dest="initial", type=_state, required=True, metavar="Y")
    prob.add_argument("--to", dest="final", type=_state, required=True, metavar="X")
    prob.add_argument("--t", type=float, required=True)
    prob.set_defaults(handler=cmd_prob)

    step = commands.add_parser(
        "step-prob", parents=[common, rates, contour], help="P from all particles at the origin"
    )
    step.add_argument("--to", dest="final", type=_state, required=True, metavar="X")
    step.add_argument("--t", type=float, required=True)
    step.add_argument("--cross-check", action="store_true", help="compare with the permutation-sum formula")
    step.add_argument("--oracle-check", action="store_true", help="compare with the master-equation oracle")
    step.add_argument("--eps", type=float, default=DEFAULT_EPS, help="oracle truncation tolerance")
    step.set_defaults(handler=cmd_step_prob)

    oracle = commands.add_parser("oracle", parents=[common, rates], help="master-equation reference values")
    oracle.add_argument("--from", dest="initial", type=_state, required=True, metavar="Y")
    oracle.add_argument("--to", dest="targets", type=_state, nargs="+", required=True, metavar="X")
    oracle.add_argument("--t", type=float, required=True)
    oracle.add_argument("--eps", type=float, default=DEFAULT_EPS, help="truncation tolerance")
    oracle.set_defaults(handler=cmd_oracle)

    simulate = commands.add_parser("simulate", parents=[common, rates], help="Monte Carlo estimates")
    simulate.add_argument("--from", dest="initial", type=_state, required=True, metavar="Y")
    simulate.add_argument("--t", type=float, required=True)
    simulate.add_argument("--trials", type=int, required=True)
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--targets", type=_state, nargs="*", default=[], metavar="X")
    simulate.set_defaults(handler=cmd_simulate)

    verify = commands.add_parser("verify", parents=[common], help="run property suites")
    verify.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    verify.add_argument("--n-max", type=int, default=3)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(handler=cmd_verify)
    return parser


def _contour(args: argparse.Namespace) -> ContourOptions:
    return ContourOptions(
        radius=args.radius,
        radius_scale=args.radius_scale,
        nodes=args.nodes,
        max_nodes=args.max_nodes,
        tol=args.tol,
        allow_unconverged=args.allow_unconverged,
        workers=args.threads,
    )


def _jsonable(value: Any) -> Any:
    if isinstance(value, StateVector):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    return value


def _inputs(args: argparse.Namespace) -> dict[str, Any]:
    return {key: _jsonable(value) for key, value in vars(args).items() if key != "handler"}


def _bethe_record(initial: StateVector, final: StateVector, t: float, result) -> ReportRecord:
    return ReportRecord(
        method="bethe",
        from_=list(initial.coords),
        to=list(final.coords),
        t=t,
        value=result.clamped,
        raw=result.p,
        error=result.estimated_error,
        converged=result.converged,
        nodes=result.nodes,
        radius=result.radius,
    )


def _mc_record(config: SimConfig, estimate: Estimate) -> ReportRecord:
    return ReportRecord(
        method="mc",
        from_=list(config.initial.coords),
        to=list(estimate.target.coords),
        t=config.t,
        value=estimate.p_hat,
        error=estimate.stderr,
        seed=config.seed,
        trials=config.trials,
    )


def cmd_prob(args: argparse.Namespace) -> RunReport:
    profile = load_rate_profile(args.rates)
    req = TransitionRequest(
        initial=args.initial, final=args.final, t=args.t, profile=profile, contour=_contour(args)
    )
    result = transition_probability(req)
    return RunReport(
        command=[],
        inputs=_inputs(args),
        records=[_bethe_record(args.initial, args.final, args.t, result)],
    )


def cmd_step_prob(args: argparse.Namespace) -> RunReport:
    profile = load_rate_profile(args.rates)
    contour = _contour(args)
    final = args.final
    initial = StateVector.zeros(final.n)
    result = step_init_prob(final, args.t, profile, contour)
    records = [_bethe_record(initial, final, args.t, result)]
    comparisons = []
    if args.cross_check:
        req = TransitionRequest(initial=initial, final=final, t=args.t, profile=profile, contour=contour)
        full = transition_probability(req)
        records.append(_bethe_record(initial, final, args.t, full))
        comparisons.append(
            Comparison(
                to=list(final.coords),
                left="bethe",
                right="bethe",
                delta=result.p - full.p,
                tolerance=CROSS_CHECK_TOL,
            )
        )
    if args.oracle_check:
        dist = oracle_distribution(initial, args.t, profile, args.eps)
        reference = dist.prob(final)
        records.append(
            ReportRecord(
                method="oracle",
                from_=list(initial.coords),
                to=list(final.coords),
                t=args.t,
                value=reference,
                error=args.eps,
                leak=dist.leak,
            )
        )
        comparisons.append(
            Comparison(
                to=list(final.coords),
                left="bethe",
                right="oracle",
                delta=result.p - reference,
                tolerance=oracle_tolerance(final.n),
            )
        )
    return RunReport(command=[], inputs=_inputs(args), records=records, comparisons=comparisons)


def cmd_oracle(args: argparse.Namespace) -> RunReport:
    profile = load_rate_profile(args.rates)
    dist = oracle_distribution(args.initial, args.t, profile, args.eps)
    records = [
        ReportRecord(
            method="oracle",
            from_=list(args.initial.coords),
            to=list(target.coords),
            t=args.t,
            value=dist.prob(target),
            error=args.eps,
            leak=dist.leak,
        )
        for target in args.targets
    ]
    return RunReport(command=[], inputs=_inputs(args), records=records)


def cmd_simulate(args: argparse.Namespace) -> RunReport:
    profile = load_rate_profile(args.rates)
    config = SimConfig(
        initial=args.initial,
        t=args.t,
        trials=args.trials,
        seed=args.seed,
        profile=profile,
        workers=args.threads,
    )
    counts = sample_states(config)
    targets = args.targets or [StateVector(coords=state) for state in sorted(counts, reverse=True)]
    estimates = [Estimate.from_hits(target, counts.get(target.coords, 0), config.trials) for target in targets]
    return RunReport(
        command=[],
        inputs=_inputs(args),
        records=[_mc_record(config, estimate) for estimate in estimates],
    )


def cmd_verify(args: argparse.Namespace) -> RunReport:
    checks = run_suite(args.suite, args.n_max, args.seed, workers=args.threads)
    return RunReport(command=[], inputs=_inputs(args), checks=checks)


def _emit(report: RunReport, args: argparse.Namespace) -> None:
    frame = checks_to_frame(report.checks) if report.checks else records_to_frame(report.records)
    if args.csv:
        frame.to_csv(sys.stdout, index=False)
    else:
        for item in (*report.records, *report.comparisons, *report.checks):
            print(item.model_dump_json(by_alias=True, exclude_none=True))
    if args.excel is not None:
        export_results(frame, args.excel, fmt="excel")
    if args.report is not None:
        args.report.write_text(report.model_dump_json(by_alias=True, indent=2) + "\n")


def _summarize(report: RunReport) -> None:
    lines = [" ".join(report.command)]
    for record in report.records:
        to = "" if record.to is None else ",".join(map(str, record.to))
        status = "" if record.converged is None else (" converged" if record.converged else " NOT converged")
        error = record.error or 0.0
        lines.append(f"  {record.method:6s} -> {to:12s} {record.value:.12g} +/- {error:.2e}{status}")
    for comparison in report.comparisons:
        lines.append(f"  {comparison.left} vs {comparison.right}: delta {comparison.delta:.3e}")
    for check in report.checks:
        verdict = "ok" if check.passed else "FAIL"
        lines.append(
            f"  {check.check:15s} n={check.n} cases={check.cases} max={check.max_residual:.3e} "
            f"tol={check.tolerance:.1e} {verdict}"
        )
    lines.append(f"  wall time {report.wall_time:.3f}s")
    print("\n".join(lines), file=sys.stderr)


def _exit_code(report: RunReport) -> int:
    if any(not check.passed for check in report.checks):
        return EXIT_VERIFY
    if any(record.converged is False for record in report.records):
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        report = args.handler(args)
    except NonConvergence as exc:
        print(f"qtazrp: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except StateSpaceTooLarge as exc:
        print(f"qtazrp: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, PoleError, OSError) as exc:
        print(f"qtazrp: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report.command = ["qtazrp", *argv]
    report.wall_time = time.perf_counter() - started
    _emit(report, args)
    _summarize(report)
    return _exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
