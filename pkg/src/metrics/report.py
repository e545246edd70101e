"""Run reports, Monte Carlo aggregation and the result CSV schemas.

flows.csv (one row per flow of one run):
    flow_id,label,ue_id,role,qfi,arrivals,departures,drops,residual,
    mean_delay,p95_delay,violation_ratio,gbr_satisfaction,throughput,offered_load

aggregate.csv (one row per scheduler x config x class x KPI):
    scheduler,config,class,kpi,mean,ci95,n_runs

runtime.csv (scheduling-call wall clock, kept apart so the files above
are byte-identical across repeats):
    scheduler,config,kpi,mean,ci95,n_runs

Missing values (no delay bound, non-GBR flow, fewer than two runs) are
written as "n/a".
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats

from src.config import CONFIDENCE_LEVEL, GBR_WINDOW
from src.metrics.kpi import (
    FlowTrace,
    deadline_misses,
    gbr_satisfaction,
    jain_index,
    jain_index_fair,
    violation_ratio,
)

logger = logging.getLogger(__name__)

NA_REP = "n/a"
CELL_CLASS = "all"

FLOW_COLUMNS = [
    "flow_id", "label", "ue_id", "role", "qfi",
    "arrivals", "departures", "drops", "residual",
    "mean_delay", "p95_delay", "violation_ratio", "gbr_satisfaction",
    "throughput", "offered_load",
]
CLASS_KPIS = [
    "mean_delay", "p95_delay", "violation_ratio", "gbr_satisfaction", "throughput", "drops",
]
CELL_KPIS = ["jain_index", "jain_index_fair", "throughput"]
RUNTIME_KPIS = ["runtime_mean", "runtime_p99"]
AGGREGATE_KEYS = ["scheduler", "config", "class", "kpi"]


@dataclass
class RunReport:
    """KPIs of one simulation run."""

    scheduler: str
    seed: int
    config: str
    num_ttis: int
    sched_calls: int
    flows: pd.DataFrame
    classes: pd.DataFrame
    jain_index: Optional[float]
    jain_index_fair: Optional[float]
    total_throughput: float
    runtimes: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def runtime_mean(self) -> float:
        return float(self.runtimes.mean()) if self.runtimes.size else 0.0

    @property
    def runtime_p99(self) -> float:
        return float(np.percentile(self.runtimes, 99)) if self.runtimes.size else 0.0


def _delay_stats(delays: np.ndarray) -> tuple[float, float]:
    if delays.size == 0:
        return np.nan, np.nan
    return float(delays.mean()), float(np.percentile(delays, 95))


def _na(value: Optional[float]) -> float:
    return np.nan if value is None else value


def flow_row(trace: FlowTrace, gbr_window: float) -> dict:
    mean_delay, p95_delay = _delay_stats(trace.delays)
    return {
        "flow_id": trace.flow_id,
        "label": trace.label,
        "ue_id": trace.ue_id,
        "role": trace.role,
        "qfi": trace.qfi,
        "arrivals": trace.arrivals,
        "departures": trace.departures,
        "drops": trace.drops,
        "residual": trace.residual,
        "mean_delay": mean_delay,
        "p95_delay": p95_delay,
        "violation_ratio": _na(violation_ratio(trace)),
        "gbr_satisfaction": _na(gbr_satisfaction(trace, gbr_window)),
        "throughput": trace.throughput,
        "offered_load": trace.offered_load,
    }


def class_rows(traces: list[FlowTrace], flows: pd.DataFrame) -> pd.DataFrame:
    """Per-role KPIs: delays and violations pooled over packets, throughput summed."""
    rows = []
    for role in dict.fromkeys(t.role for t in traces):
        members = [t for t in traces if t.role == role]
        delays = np.concatenate([t.delays for t in members]) if members else np.zeros(0)
        mean_delay, p95_delay = _delay_stats(delays)
        arrivals = sum(t.arrivals for t in members)
        drops = sum(t.drops for t in members)
        bounded = [t for t in members if t.delay_bound is not None]
        if bounded:
            offered = sum(t.arrivals for t in bounded)
            misses = sum(deadline_misses(t) for t in bounded)
            violations = misses / offered if offered else 0.0
        else:
            violations = np.nan
        sat = flows.loc[flows["role"] == role, "gbr_satisfaction"].dropna()
        rows.append({
            "class": role,
            "flows": len(members),
            "arrivals": arrivals,
            "departures": sum(t.departures for t in members),
            "drops": drops,
            "residual": sum(t.residual for t in members),
            "mean_delay": mean_delay,
            "p95_delay": p95_delay,
            "violation_ratio": violations,
            "gbr_satisfaction": float(sat.mean()) if not sat.empty else np.nan,
            "throughput": sum(t.throughput for t in members),
        })
    return pd.DataFrame(rows)


def build_run_report(
    traces: list[FlowTrace],
    scheduler: str,
    seed: int,
    runtimes: np.ndarray,
    gbr_window: float = GBR_WINDOW,
    config: str = "",
) -> RunReport:
    flows = pd.DataFrame([flow_row(t, gbr_window) for t in traces], columns=FLOW_COLUMNS)
    throughputs = [t.throughput for t in traces]
    return RunReport(
        scheduler=scheduler,
        seed=seed,
        config=config,
        num_ttis=len(traces[0].served_bits) if traces else 0,
        sched_calls=int(runtimes.size),
        flows=flows,
        classes=class_rows(traces, flows),
        jain_index=jain_index(throughputs),
        jain_index_fair=jain_index_fair(throughputs, [t.offered_load for t in traces]),
        total_throughput=float(sum(throughputs)),
        runtimes=runtimes,
    )


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------
def _kpi_rows(report: RunReport) -> list[dict]:
    base = {"scheduler": report.scheduler, "config": report.config, "seed": report.seed}
    rows = []
    for rec in report.classes.to_dict("records"):
        for kpi in CLASS_KPIS:
            rows.append({**base, "class": rec["class"], "kpi": kpi, "value": rec[kpi]})
    cell = {
        "jain_index": _na(report.jain_index),
        "jain_index_fair": _na(report.jain_index_fair),
        "throughput": report.total_throughput,
    }
    for kpi in CELL_KPIS:
        rows.append({**base, "class": CELL_CLASS, "kpi": kpi, "value": cell[kpi]})
    return rows


def _runtime_rows(report: RunReport) -> list[dict]:
    base = {"scheduler": report.scheduler, "config": report.config, "seed": report.seed}
    return [
        {**base, "kpi": "runtime_mean", "value": report.runtime_mean},
        {**base, "kpi": "runtime_p99", "value": report.runtime_p99},
    ]


def confidence_half_width(std: float, n: int, level: float = CONFIDENCE_LEVEL) -> float:
    """Student-t half-width of the CI of a sample mean; NaN when n < 2."""
    if n < 2 or np.isnan(std):
        return np.nan
    return float(stats.t.ppf(0.5 + level / 2, df=n - 1) * std / np.sqrt(n))


def _summarise(long: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    if long.empty:
        return pd.DataFrame(columns=[*keys, "mean", "ci95", "n_runs"])
    # Fixed row order keeps float sums identical however runs completed
    long = long.sort_values([*keys, "seed"], kind="stable").dropna(subset=["value"])
    grouped = long.groupby(keys, sort=True)["value"]
    out = grouped.agg(mean="mean", std="std", n_runs="count").reset_index()
    out["ci95"] = [
        confidence_half_width(s, int(n)) for s, n in zip(out["std"], out["n_runs"])
    ]
    return out[[*keys, "mean", "ci95", "n_runs"]]


@dataclass
class AggregateReport:
    """Mean and 95% CI half-width of every KPI across Monte Carlo runs."""

    kpis: pd.DataFrame
    runtime: pd.DataFrame
    n_runs: int

    def value(self, scheduler: str, cls: str, kpi: str, config: str = "") -> float:
        """Mean of one KPI; NaN when it was never defined."""
        k = self.kpis
        hit = k[
            (k["scheduler"] == scheduler)
            & (k["config"] == config)
            & (k["class"] == cls)
            & (k["kpi"] == kpi)
        ]
        return float(hit["mean"].iloc[0]) if not hit.empty else np.nan

    def ci(self, scheduler: str, cls: str, kpi: str, config: str = "") -> float:
        k = self.kpis
        hit = k[
            (k["scheduler"] == scheduler)
            & (k["config"] == config)
            & (k["class"] == cls)
            & (k["kpi"] == kpi)
        ]
        return float(hit["ci95"].iloc[0]) if not hit.empty else np.nan


def aggregate_runs(reports: list[RunReport]) -> AggregateReport:
    """Per-KPI sample mean and Student-t 95% CI half-width across runs.

    Fewer than two runs leave the CIs undefined (NaN, written as n/a).

    Raises:
        ValueError: If no reports are given.
    """
    if not reports:
        raise ValueError("aggregate_runs needs at least one report")
    kpi_long = pd.DataFrame([row for r in reports for row in _kpi_rows(r)])
    runtime_long = pd.DataFrame([row for r in reports for row in _runtime_rows(r)])
    return AggregateReport(
        kpis=_summarise(kpi_long, AGGREGATE_KEYS),
        runtime=_summarise(runtime_long, ["scheduler", "config", "kpi"]),
        n_runs=len({(r.scheduler, r.config, r.seed) for r in reports}),
    )


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------
def write_csv(df: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, na_rep=NA_REP)
    return path


def write_run_report(report: RunReport, run_dir: Path) -> Path:
    return write_csv(report.flows, run_dir / "flows.csv")


def write_aggregate(agg: AggregateReport, out_dir: Path) -> tuple[Path, Path]:
    return (
        write_csv(agg.kpis, out_dir / "aggregate.csv"),
        write_csv(agg.runtime, out_dir / "runtime.csv"),
    )


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, na_values=[NA_REP], keep_default_na=False)


def summary_table(kpis: pd.DataFrame) -> pd.DataFrame:
    """Pivot aggregate rows into `mean ± ci` cells, one row per scheduler/config/class."""
    if kpis.empty:
        return kpis

    def _cell(row: pd.Series) -> str:
        if pd.isna(row["mean"]):
            return NA_REP
        if pd.isna(row["ci95"]):
            return f"{row['mean']:.4g}"
        return f"{row['mean']:.4g} ± {row['ci95']:.2g}"

    cells = kpis.assign(cell=kpis.apply(_cell, axis=1))
    config = cells["config"].fillna("")
    cells = cells.assign(config=config)
    return cells.pivot_table(
        index=["scheduler", "config", "class"],
        columns="kpi",
        values="cell",
        aggfunc="first",
    ).fillna("")
