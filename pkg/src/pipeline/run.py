"""Command-line entry point for the scheduling simulator.

    python -m src.pipeline.run validate configs/reference.ini
    python -m src.pipeline.run run configs/reference.ini --scheduler qos-pf --seed 3
    python -m src.pipeline.run compare configs/reference.ini --schedulers qos-pf,max-ci,static-priority
    python -m src.pipeline.run sweep-weights configs/reference.ini
    python -m src.pipeline.run sweep-scale configs/reference.ini --ues 5,10,20,40
    python -m src.pipeline.run report results/
    python -m src.pipeline.run plot results/

Exit codes: 0 on success, 2 for configuration or validation errors,
1 when a run fails.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent))

from src.config import LOG_LEVEL
from src.metrics.report import (
    aggregate_runs,
    read_csv,
    summary_table,
    write_aggregate,
    write_run_report,
)
from src.pipeline.experiments import (
    BatchError,
    ExperimentPlan,
    run_batch,
    scalability_sweep,
    sensitivity_sweep,
    with_duration,
)
from src.pipeline.simulation import run_single
from src.scenario import ConfigError, ScenarioError, load_config, validate_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_BAD_CONFIG = 2


def _csv(parse):
    def _inner(raw: str) -> tuple:
        try:
            return tuple(parse(item.strip()) for item in raw.split(",") if item.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad list {raw!r}: {exc}") from exc

    return _inner


def _plan(args: argparse.Namespace, **overrides) -> ExperimentPlan:
    config = load_config(args.config)
    plan = ExperimentPlan.from_config(
        config,
        runs=args.runs,
        output_dir=args.out,
        max_workers=args.workers,
        **overrides,
    )
    return with_duration(plan, args.duration)


def _print_table(df) -> None:
    print(df.to_string())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    violations = validate_scenario(config.scenario)
    if violations:
        print(f"{args.config}: {len(violations)} problem(s)")
        for v in violations:
            print(f"  - {v}")
        return EXIT_BAD_CONFIG
    s = config.scenario
    print(
        f"{args.config}: OK - {s.num_ues} UEs x {len(s.flows_per_ue)} flows "
        f"({', '.join(p.name for p in s.flows_per_ue)}), {s.num_ttis} TTIs"
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    plan = _plan(args, schedulers=(args.scheduler,), base_seed=args.seed)
    if plan.runs > 1:
        if args.decision_log or args.traces:
            raise ValueError("--decision-log and --traces need a single run (--runs 1)")
        agg = run_batch(plan)
        _print_table(summary_table(agg.kpis))
        return EXIT_OK

    seed = plan.seeds[0]
    run_dir = plan.output_dir / args.scheduler / str(seed)
    report = run_single(
        plan.scenario,
        args.scheduler,
        seed,
        decision_log=args.decision_log,
        trace_dir=run_dir if args.traces else None,
    )
    write_run_report(report, run_dir)
    agg = aggregate_runs([report])
    write_aggregate(agg, plan.output_dir)
    _print_table(report.flows.set_index("label"))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    agg = run_batch(_plan(args, schedulers=args.schedulers))
    _print_table(summary_table(agg.kpis))
    return EXIT_OK


def cmd_sweep_weights(args: argparse.Namespace) -> int:
    table = sensitivity_sweep(_plan(args))
    _print_table(
        table.pivot_table(index=["config", "class"], columns="kpi", values="mean", aggfunc="first")
    )
    return EXIT_OK


def cmd_sweep_scale(args: argparse.Namespace) -> int:
    table = scalability_sweep(_plan(args, ue_sweep=args.ues, schedulers=args.schedulers))
    _print_table(table)
    for scheduler, exponent in table.attrs.get("growth_exponents", {}).items():
        if exponent is not None:
            print(f"{scheduler}: runtime growth exponent {exponent:.2f}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    found = False
    for name in ("aggregate.csv", "runtime.csv", "sensitivity.csv", "scalability.csv"):
        path = args.dir / name
        if not path.exists():
            continue
        found = True
        df = read_csv(path)
        print(f"\n== {name} ==")
        _print_table(summary_table(df) if name == "aggregate.csv" else df)
    if not found:
        raise FileNotFoundError(f"no result CSVs in {args.dir}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    from src.report.figures import render_all

    for path in render_all(args.dir):
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.pipeline.run",
        description="QoS-aware multi-flow 5G downlink scheduling simulator.",
    )
    parser.add_argument("--log-level", default=None, help=f"logging level (default {LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
        p.add_argument("--runs", type=int, default=None, help="Monte Carlo runs")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--duration", type=float, default=None, help="simulated seconds")
        return p

    p = sub.add_parser("validate", help="check a configuration file")
    p.add_argument("config", type=Path)
    p.set_defaults(func=cmd_validate)

    p = experiment("run", "simulate one scheduler")
    p.add_argument("--scheduler", default="qos-pf")
    p.add_argument("--seed", type=int, default=None, help="first seed (default: base_seed)")
    p.add_argument("--decision-log", type=Path, default=None, help="per-TTI decision CSV")
    p.add_argument("--traces", action="store_true", help="dump arrival and channel CSVs")
    p.set_defaults(func=cmd_run, runs=1)

    p = experiment("compare", "Monte Carlo comparison of schedulers")
    p.add_argument("--schedulers", type=_csv(str), default=None)
    p.set_defaults(func=cmd_compare)

    p = experiment("sweep-weights", "QoS-PF sensitivity to (alpha, beta, gamma)")
    p.set_defaults(func=cmd_sweep_weights)

    p = experiment("sweep-scale", "scheduling runtime against UE count")
    p.add_argument("--ues", type=_csv(int), default=None)
    p.add_argument("--schedulers", type=_csv(str), default=None)
    p.set_defaults(func=cmd_sweep_scale)

    p = sub.add_parser("report", help="print the result tables of a directory")
    p.add_argument("dir", type=Path)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="render HTML figures of a results directory")
    p.add_argument("dir", type=Path)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or LOG_LEVEL).upper(),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, ValueError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except BatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    except Exception as exc:
        logger.exception("Run failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED


if __name__ == "__main__":
    sys.exit(main())
