"""Command-line entry point: ``mbr-regret {decode|bounds|wd|simulate|crossover|report}``.

Exit codes: 0 success, 2 user or configuration error, 1 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import structlog
from pydantic import ValidationError

from mbr_regret import __version__
from mbr_regret.bounds import crossover_case2_threshold, evaluate_bounds
from mbr_regret.config import config
from mbr_regret.decoding import TrialSpec, mbr_decode_exact, mbr_decode_mc, run_trial
from mbr_regret.errors import ExperimentConfigError, MBRRegretError
from mbr_regret.models import BoundInputs, CostMode, Objective
from mbr_regret.simulation import observation1_rows, run_crossover_study, run_sweep
from mbr_regret.tools.config_file import (
    SPEC_SECTIONS,
    apply_overrides,
    build_decode_config,
    build_experiment_spec,
    load_config_file,
    parse_config_text,
)
from mbr_regret.tools.export import (
    CROSSOVER_COLUMNS,
    SUMMARY_COLUMNS,
    append_regret_report,
    read_distribution,
    read_matrix,
    write_bound_table,
    write_coupling,
    write_crossover,
    write_observation1,
    write_results,
    write_summary,
)
from mbr_regret.tools.plots import emit_crossover_plot, emit_regret_plot
from mbr_regret.tools.report import read_results, summarize_rows
from mbr_regret.transport import wasserstein
from mbr_regret.utilities import LipschitzCost, MatrixUtility, default_cost

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def configure_logging(level: str | None = None, json_output: bool | None = None) -> None:
    """Configure structlog once for the process; logs go to stderr."""
    level_name = (level or config.log_level).upper()
    renderer = (
        structlog.processors.JSONRenderer()
        if (config.log_json if json_output is None else json_output)
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelNamesMapping().get(level_name, logging.INFO)
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _config_tree(
    args: argparse.Namespace, sections: tuple[str, ...] = SPEC_SECTIONS
) -> dict[str, dict[str, str]]:
    tree = load_config_file(args.config) if args.config else parse_config_text("")
    overrides = list(args.set or [])
    for flag, key in (("--seeds", "seeds"), ("--master-seed", "master_seed")):
        value = getattr(args, key, None)
        if value is None:
            continue
        if "experiment" not in sections:
            raise ExperimentConfigError(f"{flag} is not used by '{args.command}'")
        overrides.append(f"experiment.{key}={value}")
    return apply_overrides(tree, overrides, sections)


def _reject_config(args: argparse.Namespace) -> None:
    """Raise if config input reaches a command that reads only flags."""
    for flag, value in (("--config", args.config), ("--set", args.set)):
        if value:
            raise ExperimentConfigError(f"{flag} is not used by '{args.command}'")


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_decode(args: argparse.Namespace) -> int:
    """Exact and Monte Carlo MBR on a model distribution and utility matrix.

    The Monte Carlo line and the regret line come from the same reference
    sample, so ``chosen`` is the hypothesis whose regret is reported.

    Args:
        args: Parsed arguments; inputs come from the ``decode`` config section.

    Returns:
        Exit code.

    Raises:
        ExperimentConfigError: If the decode section is incomplete or has unknown keys.
        ResultsFileError: If a distribution or matrix file is malformed.
    """
    decode = build_decode_config(_config_tree(args, ("decode",)))
    p_model = read_distribution(decode.distribution)
    utility = MatrixUtility(read_matrix(decode.utility), u_max=decode.u_max)
    p_human = read_distribution(decode.human) if decode.human else p_model

    outcome = run_trial(
        TrialSpec(
            p_human=p_human,
            utility=utility,
            n=decode.n,
            seed=decode.seed,
            p_model=p_model,
            candidate_mode=decode.candidate_mode,
        )
    )
    exact = mbr_decode_exact(utility, p_model, objective=Objective.U_M)
    print(f"objective={exact.objective.value} chosen={exact.chosen} score={exact.score:.12g}")
    mc = mbr_decode_mc(utility, outcome.refs, decode.candidate_mode)
    print(f"objective={mc.objective.value} chosen={mc.chosen} score={mc.score:.12g} n={decode.n}")

    report = outcome.report
    if decode.human:
        print(f"regret_n={report.regret_n:.12g} regret_map={report.regret_map:.12g}")
    if args.out:
        append_regret_report(report, _out_dir(args) / "regret_reports.csv")
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    """Evaluate every bound computable from the given symbols.

    Args:
        args: Parsed arguments carrying the bound symbols.

    Returns:
        Exit code.

    Raises:
        ExperimentConfigError: If ``--config`` or ``--set`` is given.
        ValidationError: If a symbol is out of range.
    """
    _reject_config(args)
    inputs = BoundInputs(
        n=args.n,
        d_size=args.d_size,
        dim=args.dim,
        delta=args.delta,
        wd_hm=args.wd_hm,
        wd_tt=args.wd_tt,
        u_max=args.u_max,
        alpha_err=args.alpha_err,
    )
    report = evaluate_bounds(inputs, raw=args.raw)
    for name, bound in report.bounds.items():
        terms = ", ".join(f"{t.label}={t.value:.5f}" for t in bound.terms)
        print(f"{name:<24} {bound.value:.5f}  ({terms})")
    for name, missing in report.omitted.items():
        print(f"{name:<24} omitted (requires {', '.join(missing)})")
    if args.out:
        write_bound_table([report], _out_dir(args) / "bounds.csv")
    return EXIT_OK


def cmd_wd(args: argparse.Namespace) -> int:
    """Exact Wasserstein distance between two distribution files.

    Args:
        args: Parsed arguments naming the distribution and utility files.

    Returns:
        Exit code.

    Raises:
        ExperimentConfigError: If config input is given, or a tightened cost lacks a utility.
        ResultsFileError: If an input file is malformed.
        TransportError: If the solver fails.
    """
    _reject_config(args)
    nu = read_distribution(args.nu)
    mu = read_distribution(args.mu)
    if args.utility:
        utility = MatrixUtility(read_matrix(args.utility), u_max=args.u_max)
        cost = default_cost(utility, args.cost)
    elif CostMode(args.cost) == CostMode.TIGHTENED:
        raise ExperimentConfigError("--cost tightened requires --utility")
    else:
        values = [[0.0 if i == j else args.u_max for j in range(nu.space.size)] for i in range(nu.space.size)]
        cost = LipschitzCost(values)

    result = wasserstein(nu, mu, cost)
    print(
        f"wd={result.distance:.12g} method={result.stats.method} "
        f"iterations={result.stats.iterations} support={result.stats.rows}x{result.stats.cols}"
    )
    if args.dump:
        write_coupling(result, nu.space.size, args.dump)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run a sweep and write results, summary and the regret plot script.

    Args:
        args: Parsed arguments; the sweep comes from the ``experiment`` and
            ``simulate`` config sections.

    Returns:
        Exit code.

    Raises:
        ExperimentConfigError: If the configuration is invalid.
    """
    spec = build_experiment_spec(_config_tree(args))
    out = _out_dir(args)
    result = run_sweep(spec)

    write_results(result.rows, out / "results.csv")
    write_summary(result.summary, out / "summary.csv")
    emit_regret_plot(out / "plot_regret.py", "summary.csv", SUMMARY_COLUMNS)
    written = ["results.csv", "summary.csv", "plot_regret.py"]
    if spec.observation1:
        write_observation1(observation1_rows(result.rows), out / "observation1.csv")
        written.append("observation1.csv")

    print(f"{len(result.rows)} rows, {len(result.summary)} points")
    for name in written:
        print(f"wrote {out / name}")
    return EXIT_OK


def cmd_crossover(args: argparse.Namespace) -> int:
    """Tabulate where the MBR bound undercuts the MAP bound.

    Args:
        args: Parsed arguments; the grid comes from the experiment config sections.

    Returns:
        Exit code.
    """
    spec = build_experiment_spec(_config_tree(args))
    out = _out_dir(args)
    rows = run_crossover_study(spec)
    write_crossover(rows, out / "crossover.csv")
    emit_crossover_plot(out / "plot_crossover.py", "crossover.csv", CROSSOVER_COLUMNS)

    for delta in spec.deltas:
        threshold = crossover_case2_threshold(spec.dim, delta)
        print(f"delta={delta:g} d={spec.dim}: MBR bound smaller for all n >= {threshold} as |D| grows")
    inconsistent = sum(not row.consistent for row in rows)
    print(f"{len(rows)} points, {inconsistent} inconsistent")
    print(f"wrote {out / 'crossover.csv'}")
    print(f"wrote {out / 'plot_crossover.py'}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Recompute the per-point summary from a results file.

    Args:
        args: Parsed arguments naming the results CSV.

    Returns:
        Exit code.

    Raises:
        ResultsFileError: If the results file is malformed.
    """
    _reject_config(args)
    rows = read_results(args.results)
    if not rows:
        print("0 rows")
        return EXIT_OK

    summary = summarize_rows(rows)
    print(f"{len(rows)} rows, {len(summary)} points")
    for point in summary:
        rate = point.violation_rate_mbr if point.violation_rate_mbr is not None else point.violation_rate_bound3
        rate_text = "n/a" if rate is None else f"{rate:.3f}"
        print(
            f"n={point.n} D={point.D} delta={point.delta_config:g} "
            f"median_regret={point.regret_n_median:.6g} violation_rate={rate_text}"
        )
    if args.out:
        write_summary(summary, _out_dir(args) / "summary.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Config file of 'section.key = value' lines")
    common.add_argument("--out", help="Output directory")
    common.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="Override a config key (repeatable)"
    )
    common.add_argument("--seeds", type=int, help="Number of seeds")
    common.add_argument("--master-seed", type=int, help="Master seed")
    common.add_argument("--log-level", help="Log level (default from MBR_REGRET_LOG_LEVEL)")

    parser = argparse.ArgumentParser(
        prog="mbr-regret", description="MBR and MAP decoding regret simulation lab"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", parents=[common], help="Decode with MBR on a given distribution")
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("bounds", parents=[common], help="Evaluate the regret upper bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d-size", type=int, help="Training set size |D|")
    p.add_argument("--dim", type=int, default=4, help="Embedding dimension d")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--wd-hm", type=float, help="WD(P_human, P_model)")
    p.add_argument("--wd-tt", type=float, help="WD(P_model, P_model^t)")
    p.add_argument("--alpha-err", type=float)
    p.add_argument("--u-max", type=float, default=1.0)
    p.add_argument("--raw", action="store_true", help="Also print pre-simplification forms")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("wd", parents=[common], help="Wasserstein distance between two files")
    p.add_argument("--nu", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--utility", help="Utility matrix file")
    p.add_argument("--cost", choices=[m.value for m in CostMode], default=CostMode.TRIVIAL.value)
    p.add_argument("--u-max", type=float, default=1.0)
    p.add_argument("--dump", help="Write the optimal coupling to this CSV")
    p.set_defaults(handler=cmd_wd)

    p = sub.add_parser("simulate", parents=[common], help="Run a regret sweep")
    p.set_defaults(handler=cmd_simulate, out=".")

    p = sub.add_parser("crossover", parents=[common], help="MBR vs MAP bound crossover table")
    p.set_defaults(handler=cmd_crossover, out=".")

    p = sub.add_parser("report", parents=[common], help="Summarize a results CSV")
    p.add_argument("results")
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except (MBRRegretError, ValidationError, OSError) as e:
        logger.debug("command_failed", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error("command_crashed", command=args.command, error=str(e), exc_info=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
