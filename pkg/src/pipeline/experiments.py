"""Monte Carlo batches and parameter sweeps.

Run k of a batch uses seed base_seed + k. Every scheduler in a batch is
run on the same seeds, and since arrivals and channel draws depend only
on the seed, schedulers are compared on identical realizations.

Output layout under the plan's output directory:
    <scheduler>/<seed>/flows.csv   per-run flow KPIs
    aggregate.csv                  mean and 95% CI per scheduler x class x KPI
    runtime.csv                    scheduling-call runtime per scheduler
    sensitivity.csv                QoS-PF KPIs per weight configuration
    scalability.csv                scheduling-call runtime per UE count
"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from src.config import (
    BASE_SEED,
    DEFAULT_SCHEDULERS,
    DEFAULT_WEIGHTS,
    MAX_WORKERS,
    MONTE_CARLO_RUNS,
    OUTPUT_DIR,
    UE_SWEEP,
    WEIGHT_CONFIGS,
)
from src.metrics.report import (
    AggregateReport,
    RunReport,
    aggregate_runs,
    write_aggregate,
    write_csv,
    write_run_report,
)
from src.model import Scenario
from src.pipeline.simulation import run_single
from src.scenario import ScenarioConfig, named_weights, require_valid, validate_weights
from src.sched.schedulers import SCHEDULERS

logger = logging.getLogger(__name__)

SENSITIVITY_SCHEDULER = "qos-pf"
SCALABILITY_COLUMNS = ["ues", "mean_runtime", "p99_runtime", "scheduler", "ci95", "n_runs"]


class BatchError(RuntimeError):
    """A run of a batch failed; the batch is aborted."""

    def __init__(self, scheduler: str, seed: int, cause: BaseException) -> None:
        self.scheduler = scheduler
        self.seed = seed
        super().__init__(f"run failed for scheduler {scheduler!r} seed {seed}: {cause}")


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run: a scenario, the schedulers, how many seeds and where to write."""

    scenario: Scenario
    schedulers: tuple[str, ...] = DEFAULT_SCHEDULERS
    runs: int = MONTE_CARLO_RUNS
    base_seed: int = BASE_SEED
    weight_configs: dict[str, tuple[float, float, float]] = field(
        default_factory=lambda: dict(WEIGHT_CONFIGS)
    )
    ue_sweep: tuple[int, ...] = UE_SWEEP
    output_dir: Path = Path(OUTPUT_DIR)
    max_workers: int = MAX_WORKERS

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1 (got {self.runs})")
        if not self.schedulers:
            raise ValueError("at least one scheduler is required")
        unknown = [s for s in self.schedulers if s not in SCHEDULERS]
        if unknown:
            raise ValueError(
                f"unknown scheduler(s) {unknown}; choose from {', '.join(SCHEDULERS)}"
            )
        if any(n < 1 for n in self.ue_sweep):
            raise ValueError(f"ue_sweep entries must be >= 1 (got {self.ue_sweep})")
        for name, weights in self.weight_configs.items():
            validate_weights(name, weights)

    @property
    def seeds(self) -> list[int]:
        return [self.base_seed + k for k in range(self.runs)]

    @classmethod
    def from_config(cls, config: ScenarioConfig, **overrides: Any) -> "ExperimentPlan":
        """Build a plan from a loaded configuration; non-None overrides win."""
        exp = config.experiment
        values: dict[str, Any] = {
            "scenario": config.scenario,
            "weight_configs": named_weights(config),
        }
        if "runs" in exp:
            values["runs"] = exp["runs"]
        if "base_seed" in exp:
            values["base_seed"] = exp["base_seed"]
        if exp.get("schedulers"):
            values["schedulers"] = tuple(exp["schedulers"])
        if exp.get("ue_sweep"):
            values["ue_sweep"] = tuple(exp["ue_sweep"])
        if exp.get("output_dir"):
            values["output_dir"] = Path(exp["output_dir"])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _run_task(scenario: Scenario, scheduler: str, seed: int, config: str) -> RunReport:
    return run_single(scenario, scheduler, seed, config=config)


def _execute(
    scenario: Scenario,
    tasks: list[tuple[str, int]],
    max_workers: int,
    config: str = "",
) -> list[RunReport]:
    """Run (scheduler, seed) tasks serially or on a process pool.

    Results come back in task order regardless of completion order.

    Raises:
        BatchError: On the first failing run.
    """
    if max_workers <= 1 or len(tasks) <= 1:
        reports = []
        for scheduler, seed in tasks:
            try:
                reports.append(_run_task(scenario, scheduler, seed, config))
            except Exception as exc:
                logger.error("Run %s seed=%d failed: %s", scheduler, seed, exc)
                raise BatchError(scheduler, seed, exc) from exc
        return reports

    done: dict[tuple[str, int], RunReport] = {}
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        futures = {
            pool.submit(_run_task, scenario, scheduler, seed, config): (scheduler, seed)
            for scheduler, seed in tasks
        }
        for future in as_completed(futures):
            scheduler, seed = futures[future]
            try:
                done[(scheduler, seed)] = future.result()
            except Exception as exc:
                logger.error("Run %s seed=%d failed: %s", scheduler, seed, exc)
                for other in futures:
                    other.cancel()
                raise BatchError(scheduler, seed, exc) from exc
    return [done[task] for task in tasks]


def run_batch(plan: ExperimentPlan, write: bool = True) -> AggregateReport:
    """Run every scheduler of the plan on every seed and aggregate.

    Args:
        plan: The experiment plan.
        write: Write per-run flows.csv plus aggregate.csv and runtime.csv.

    Returns:
        The aggregate over all runs, one group per scheduler.

    Raises:
        ScenarioError: If the scenario is invalid.
        BatchError: If any run fails.
    """
    require_valid(plan.scenario)
    tasks = [(s, seed) for s in plan.schedulers for seed in plan.seeds]

    logger.info("=" * 60)
    logger.info(
        "Batch starting: %s x %d runs (seeds %d..%d), %d UEs, %.1f s",
        ", ".join(plan.schedulers),
        plan.runs,
        plan.seeds[0],
        plan.seeds[-1],
        plan.scenario.num_ues,
        plan.scenario.sim_duration,
    )
    logger.info("=" * 60)

    reports = _execute(plan.scenario, tasks, plan.max_workers)
    agg = aggregate_runs(reports)

    if write:
        for report in reports:
            write_run_report(report, plan.output_dir / report.scheduler / str(report.seed))
        paths = write_aggregate(agg, plan.output_dir)
        logger.info("Wrote %s and %s", *paths)

    logger.info("=" * 60)
    logger.info("Batch complete - %d runs", len(reports))
    logger.info("=" * 60)
    return agg


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------
def sensitivity_sweep(plan: ExperimentPlan, write: bool = True) -> pd.DataFrame:
    """QoS-PF KPIs for every named (alpha, beta, gamma) configuration.

    Each configuration is applied to every flow and run on the plan's
    seeds. `change_vs_balanced` is the relative change of each KPI mean
    against the balanced configuration (NaN when that is not swept).

    Raises:
        ValueError: If the plan has no weight configurations.
    """
    if not plan.weight_configs:
        raise ValueError("sensitivity sweep needs at least one weight configuration")

    logger.info("=" * 60)
    logger.info("Sensitivity sweep: %s", ", ".join(plan.weight_configs))
    logger.info("=" * 60)

    tables = []
    for name, (alpha, beta, gamma) in plan.weight_configs.items():
        scenario = require_valid(plan.scenario.with_weights(alpha, beta, gamma))
        tasks = [(SENSITIVITY_SCHEDULER, seed) for seed in plan.seeds]
        agg = aggregate_runs(_execute(scenario, tasks, plan.max_workers, config=name))
        tables.append(agg.kpis.assign(alpha=alpha, beta=beta, gamma=gamma))
        logger.info("Configuration %s (%.2f, %.2f, %.2f) done.", name, alpha, beta, gamma)

    table = pd.concat(tables, ignore_index=True)
    baseline = table[table["config"] == DEFAULT_WEIGHTS].set_index(["class", "kpi"])["mean"]
    ref = pd.Series(
        [baseline.get((c, k), np.nan) for c, k in zip(table["class"], table["kpi"])],
        index=table.index,
        dtype=float,
    )
    table["change_vs_balanced"] = (table["mean"] - ref) / ref.where(ref != 0)
    table = table[
        ["config", "alpha", "beta", "gamma", "class", "kpi",
         "mean", "ci95", "n_runs", "change_vs_balanced"]
    ]
    if write:
        path = write_csv(table, plan.output_dir / "sensitivity.csv")
        logger.info("Wrote %s", path)
    return table


def fit_growth_exponent(ues: list[int], runtimes: list[float]) -> float:
    """Slope of a least-squares line through (log ues, log runtime).

    Raises:
        ValueError: With fewer than two distinct UE counts or a non-positive runtime.
    """
    x = np.asarray(ues, dtype=float)
    y = np.asarray(runtimes, dtype=float)
    if len(np.unique(x)) < 2:
        raise ValueError("need at least two distinct UE counts to fit a growth exponent")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("UE counts and runtimes must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def scalability_sweep(plan: ExperimentPlan, write: bool = True) -> pd.DataFrame:
    """Mean and p99 scheduling-call duration per UE count and scheduler.

    Runtime is averaged over the plan's seeds. The fitted growth exponent
    of each scheduler is logged and stored in the frame's attrs under
    "growth_exponents".

    Raises:
        ValueError: If the UE sweep is empty.
    """
    if not plan.ue_sweep:
        raise ValueError("scalability sweep needs at least one UE count")

    logger.info("=" * 60)
    logger.info("Scalability sweep: UEs %s", ", ".join(str(n) for n in plan.ue_sweep))
    logger.info("=" * 60)

    rows = []
    for num_ues in plan.ue_sweep:
        scenario = require_valid(plan.scenario.with_ues(num_ues))
        tasks = [(s, seed) for s in plan.schedulers for seed in plan.seeds]
        agg = aggregate_runs(_execute(scenario, tasks, plan.max_workers))
        runtime = agg.runtime.set_index(["scheduler", "kpi"])
        for scheduler in plan.schedulers:
            mean = runtime.loc[(scheduler, "runtime_mean")]
            p99 = runtime.loc[(scheduler, "runtime_p99")]
            rows.append({
                "ues": num_ues,
                "mean_runtime": float(mean["mean"]),
                "p99_runtime": float(p99["mean"]),
                "scheduler": scheduler,
                "ci95": float(mean["ci95"]),
                "n_runs": int(mean["n_runs"]),
            })
            logger.info(
                "%d UEs, %s: mean %.1f us, p99 %.1f us",
                num_ues, scheduler, rows[-1]["mean_runtime"] * 1e6, rows[-1]["p99_runtime"] * 1e6,
            )

    table = pd.DataFrame(rows, columns=SCALABILITY_COLUMNS)
    exponents: dict[str, Optional[float]] = {}
    for scheduler, group in table.groupby("scheduler", sort=False):
        try:
            exponents[scheduler] = fit_growth_exponent(
                group["ues"].tolist(), group["mean_runtime"].tolist()
            )
            logger.info("%s runtime growth exponent: %.2f", scheduler, exponents[scheduler])
        except ValueError as exc:
            logger.warning("No growth exponent for %s: %s", scheduler, exc)
            exponents[scheduler] = None
    table.attrs["growth_exponents"] = exponents

    if write:
        path = write_csv(table, plan.output_dir / "scalability.csv")
        logger.info("Wrote %s", path)
    return table


def with_duration(plan: ExperimentPlan, sim_duration: Optional[float]) -> ExperimentPlan:
    """Copy of the plan with a different simulated horizon."""
    if sim_duration is None:
        return plan
    return replace(plan, scenario=replace(plan.scenario, sim_duration=sim_duration))
