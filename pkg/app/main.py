"""
Command line entry point.

    python -m app space --space gasket --level 4
    python -m app kernel --space circle --n 64 --delta 1 --t 0.1 --out out
    python -m app subordinator --delta 0.5 --t 1 --s 1
    python -m app seminorm --space circle --n 256 --delta 0.5 --p 1 --alpha 0.5 --f tent
    python -m app exponent --space circle --n 256 --delta 0.8 --p 1
    python -m app suite coarea --space interval --n 128 --boundary absorbing --delta 0.5
    python -m app run scenario.json

Results go to stdout, logs to stderr. Exit codes: 0 every check passed,
1 invalid input, 2 a check failed, 3 a check was inconclusive.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from app.core.exceptions import CliError, CommandFailedError, InvalidScenarioError
from app.domain.exceptions import DomainException
from app.domain.value_objects import BoundaryMode, DivergentMoment, SpaceKind
from app.infrastructure.container import get_container
from app.infrastructure.report_writer import FileReportSink, dump_json, format_cell
from app.log.logging import init_logging, logger
from app.schemas.scenario import ScenarioConfig, SuiteName, validation_diagnostic
from app.schemas.space_descriptor import SpaceDescriptor, from_descriptor, space_descriptor
from app.services import subordinator
from app.services.analysis import critical_exponent
from app.services.families import FunctionKind, build_function, canonical_family
from app.services.seminorms import seminorm_report
from app.services.space import ahlfors_fit
from app.services.spectral import eigendecompose, kernel_at

SEMINORM_HEADER = ("function_id", "besov", "ks_limsup", "ks_sup", "w_norm", "N_p_inf", "N_p_p")


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message: str):
        raise CliError(f"{self.prog}: {message}", exit_code=1)


def _add_space_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--space", type=SpaceKind, choices=list(SpaceKind), required=True)
    size = parser.add_mutually_exclusive_group(required=True)
    size.add_argument("--n", type=int, help="node count (circle, interval)")
    size.add_argument("--level", type=int, help="level (gasket, vicsek)")
    size.add_argument("--path", type=str, help="edge list (adjacency)")
    parser.add_argument("--boundary", type=BoundaryMode, choices=list(BoundaryMode), default=BoundaryMode.NONE)


def build_parser() -> LabArgumentParser:
    parser = LabArgumentParser(prog="subheat", description="Subordinated heat kernel laboratory")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default SUBHEAT_THREADS)")
    parser.add_argument("--log-level", type=str, default=None)
    parser.add_argument("--json-logs", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    space_cmd = sub.add_parser("space", help="Build a space and fit its volume growth")
    _add_space_flags(space_cmd)
    space_cmd.add_argument("--out", type=Path, default=None)

    kernel_cmd = sub.add_parser("kernel", help="Export the subordinated heat kernel")
    _add_space_flags(kernel_cmd)
    kernel_cmd.add_argument("--delta", type=float, required=True)
    kernel_cmd.add_argument("--t", type=float, required=True)
    kernel_cmd.add_argument("--binary", action="store_true")
    kernel_cmd.add_argument("--out", type=Path, default=Path("out"))

    subordinator_cmd = sub.add_parser("subordinator", help="Evaluate the stable subordinator density")
    subordinator_cmd.add_argument("--delta", type=float, required=True)
    subordinator_cmd.add_argument("--t", type=float, required=True)
    subordinator_cmd.add_argument("--s", type=float, nargs="+", required=True)
    subordinator_cmd.add_argument("--alpha", type=float, nargs="*", default=[], help="moment orders")
    subordinator_cmd.add_argument("--out", type=Path, default=None)

    seminorm_cmd = sub.add_parser("seminorm", help="Besov, Korevaar-Schoen, W and Grigor'yan seminorms")
    _add_space_flags(seminorm_cmd)
    seminorm_cmd.add_argument("--delta", type=float, required=True)
    seminorm_cmd.add_argument("--p", type=float, required=True)
    seminorm_cmd.add_argument("--alpha", type=float, required=True)
    seminorm_cmd.add_argument("--f", type=FunctionKind, choices=list(FunctionKind), default=FunctionKind.TENT)
    seminorm_cmd.add_argument("--seed", type=int, default=None)
    seminorm_cmd.add_argument("--out", type=Path, default=Path("out"))

    exponent_cmd = sub.add_parser("exponent", help="Estimate the critical Besov exponent")
    _add_space_flags(exponent_cmd)
    exponent_cmd.add_argument("--delta", type=float, required=True)
    exponent_cmd.add_argument("--p", type=float, required=True)
    exponent_cmd.add_argument("--kappa", type=float, default=None)
    exponent_cmd.add_argument("--seed", type=int, default=None)
    exponent_cmd.add_argument("--out", type=Path, default=None)

    suite_cmd = sub.add_parser("suite", help="Run one suite without a scenario file")
    suite_cmd.add_argument("name", type=SuiteName, choices=list(SuiteName))
    _add_space_flags(suite_cmd)
    suite_cmd.add_argument("--delta", type=float, nargs="+", required=True)
    suite_cmd.add_argument("--p", type=float, nargs="+", default=[1.0])
    suite_cmd.add_argument("--alpha", type=float, nargs="+", default=None)
    suite_cmd.add_argument("--kappa", type=float, default=None)
    suite_cmd.add_argument("--seed", type=int, default=None)
    suite_cmd.add_argument("--out", type=Path, default=Path("out"))

    run_cmd = sub.add_parser("run", help="Run a scenario file")
    run_cmd.add_argument("config", type=Path)
    run_cmd.add_argument("--out", type=Path, default=None, help="overrides output_dir")
    return parser


def _descriptor(args: argparse.Namespace) -> SpaceDescriptor:
    resolution = args.level if args.level is not None else args.n
    try:
        return SpaceDescriptor(
            kind=args.space,
            resolution=1 if args.path else resolution,
            boundary_mode=args.boundary,
            path=args.path,
        )
    except ValidationError as error:
        raise InvalidScenarioError(validation_diagnostic(error)) from error


def _print(payload) -> None:
    sys.stdout.write(dump_json(payload))


def cmd_space(args: argparse.Namespace) -> int:
    graph = from_descriptor(_descriptor(args))
    descriptor = space_descriptor(graph, path=args.path)
    payload = {
        "descriptor": descriptor.model_dump(mode="json"),
        "node_count": graph.node_count,
        "diameter": graph.diameter,
        "total_mass": graph.total_mass,
        "ahlfors": ahlfors_fit(graph).to_dict(),
    }
    _print(payload)
    if args.out is not None:
        sink = FileReportSink(args.out)
        sink.write_manifest({"space": descriptor.model_dump(mode="json")})
        sink.write_table_csv("nodes", ("node", "coordinate", "mass"),
                             [(i, c, m) for i, (c, m) in enumerate(zip(graph.coordinate, graph.measure))])
    return 0


def cmd_kernel(args: argparse.Namespace) -> int:
    graph = from_descriptor(_descriptor(args))
    kernel = kernel_at(eigendecompose(graph), args.delta, args.t)
    stem = f"kernel_{graph.name}_delta{args.delta:g}_t{args.t:g}"
    path = FileReportSink(args.out).write_kernel(stem, kernel, binary=args.binary)
    sys.stdout.write(path + "\n")
    return 0


def cmd_subordinator(args: argparse.Namespace) -> int:
    values = subordinator.density(args.delta, args.t, args.s)
    rows = [(args.delta, args.t, s, float(v)) for s, v in zip(args.s, values)]
    for row in rows:
        sys.stdout.write(format_cell(row[-1]) + "\n")
    for alpha in args.alpha:
        result = subordinator.moment(args.delta, args.t, alpha)
        text = str(result) if isinstance(result, DivergentMoment) else format_cell(result)
        sys.stdout.write(f"moment[{alpha:g}] {text}\n")
    if args.out is not None:
        FileReportSink(args.out).write_table_csv("subordinator", ("delta", "t", "s", "density"), rows)
    return 0


def cmd_seminorm(args: argparse.Namespace) -> int:
    graph = from_descriptor(_descriptor(args))
    spec = eigendecompose(graph)
    f = build_function(graph, spec, args.f, seed=args.seed)
    report, curve = seminorm_report(spec, graph, args.delta, f, args.p, args.alpha, function_id=args.f.value,
                                    executor=get_container().executor)
    sink = FileReportSink(args.out)
    sink.write_curve_csv(f"{graph.name}_energy_{args.f.value}_p{args.p:g}", ("t", "E_p", "scaled"),
                         curve.rows(args.alpha))
    sink.write_table_csv("seminorms", SEMINORM_HEADER, [report.table_row()])
    _print(report.to_dict())
    return 0


def cmd_exponent(args: argparse.Namespace) -> int:
    graph = from_descriptor(_descriptor(args))
    spec = eigendecompose(graph)
    family = canonical_family(graph, spec, seed=args.seed)
    report = critical_exponent(spec, graph, args.delta, args.p, family, kappa=args.kappa,
                               executor=get_container().executor)
    _print(report.to_dict())
    if args.out is not None:
        FileReportSink(args.out).write_report([report.to_dict()])
    return {"pass": 0, "fail": 2, "inconclusive": 3}[report.status.value]


def _run(config: ScenarioConfig, out: Optional[Path]) -> int:
    output_dir = out if out is not None else Path(config.output_dir)
    outcome = get_container().create_run_scenario(output_dir).execute(config)
    _print({"exit_code": int(outcome.exit_code), "counts": outcome.counts, "report": outcome.report_path})
    return int(outcome.exit_code)


def cmd_suite(args: argparse.Namespace) -> int:
    payload = {
        "space": _descriptor(args).model_dump(mode="json"),
        "deltas": args.delta,
        "ps": args.p,
        "alphas": args.alpha,
        "kappa": args.kappa,
        "suites": [args.name.value],
        "output_dir": str(args.out),
    }
    if args.seed is not None:
        payload["seed"] = args.seed
    try:
        config = ScenarioConfig.model_validate(payload)
    except ValidationError as error:
        raise InvalidScenarioError(validation_diagnostic(error)) from error
    return _run(config, args.out)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = ScenarioConfig.from_file(args.config)
    except OSError as error:
        raise InvalidScenarioError(f"{args.config}: {error.strerror}") from error
    except ValidationError as error:
        raise InvalidScenarioError(validation_diagnostic(error)) from error
    return _run(config, args.out)


COMMANDS = {
    "space": cmd_space,
    "kernel": cmd_kernel,
    "subordinator": cmd_subordinator,
    "seminorm": cmd_seminorm,
    "exponent": cmd_exponent,
    "suite": cmd_suite,
    "run": cmd_run,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        init_logging(level=args.log_level, json_logs=True if args.json_logs else None)
        get_container(workers=args.threads)
        try:
            return COMMANDS[args.command](args)
        except DomainException as error:
            raise CommandFailedError(error) from error
    except CliError as error:
        logger.error(error.detail, event_type="CLI_ERROR", exit_code=error.exit_code)
        sys.stderr.write(error.detail + "\n")
        return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
