"""Single-run TTI loop.

Per TTI, in this order:
  1. arrivals of every flow are enqueued (tail drop at buffer capacity)
  2. a fresh PRB grid is built from the channel model
  3. the scheduler allocates the grid over flows with backlog
  4. grants are served FIFO and departure delays recorded
  5. every flow's EMA throughput is updated, served or not

Arrivals and channel capacities depend only on the scenario and seed,
never on the scheduler, so every policy sees the same realization for a
given seed.
"""

import logging
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from src.channel.model import ChannelModel, dump_channel_realization, grid_for_tti
from src.metrics.kpi import FlowTrace, packet_delay
from src.metrics.report import RunReport, build_run_report
from src.model import (
    Allocation,
    FlowState,
    ResourceGrid,
    Scenario,
    SchedulerInput,
    TtiClock,
)
from src.scenario import require_valid
from src.sched.schedulers import QosPfScheduler, Scheduler, make_scheduler
from src.sched.utility import UtilityFn, update_ema
from src.traffic.generator import (
    arrivals_at,
    build_processes,
    dump_arrival_trace,
    enqueue,
    serve,
)

logger = logging.getLogger(__name__)

DECISION_LOG_COLUMNS = ["tti", "scheduler", "flow_id", "metric", "prbs", "bytes"]

AllocationHook = Callable[[Allocation, ResourceGrid, tuple[FlowState, ...]], None]


def build_flows(scenario: Scenario) -> list[FlowState]:
    """Empty flow states for every (UE, profile) pair, indexed by flow_id."""
    return [
        FlowState(
            flow_id=scenario.flow_id(ue_id, idx),
            ue_id=ue_id,
            profile=profile,
            buffer_capacity=scenario.buffer_capacity,
            avg_throughput=scenario.pf_params.avg_throughput_floor,
        )
        for ue_id in range(scenario.num_ues)
        for idx, profile in enumerate(scenario.flows_per_ue)
    ]


def _scheduler_for(
    name: str,
    scenario: Scenario,
    utility_fn: Optional[UtilityFn],
) -> Scheduler:
    if utility_fn is not None:
        if name != QosPfScheduler.name:
            raise ValueError(f"a custom utility only applies to qos-pf (got {name!r})")
        return QosPfScheduler(scenario.pf_params, utility_fn)
    return make_scheduler(name, scenario.pf_params)


def run_single(
    scenario: Scenario,
    scheduler_name: str,
    seed: Optional[int] = None,
    *,
    config: str = "",
    utility_fn: Optional[UtilityFn] = None,
    decision_log: Optional[Path] = None,
    trace_dir: Optional[Path] = None,
    on_allocation: Optional[AllocationHook] = None,
) -> RunReport:
    """Simulate one scenario under one scheduler for scenario.num_ttis TTIs.

    Args:
        scenario: The scenario; validated before anything runs.
        scheduler_name: A registered scheduler name.
        seed: Overrides scenario.seed when given.
        config: Label carried into the report (e.g. a weight configuration).
        utility_fn: Replacement utility for qos-pf.
        decision_log: When set, per-grant rows are written to this CSV.
        trace_dir: When set, arrival and channel realizations are dumped here.
        on_allocation: Called after every scheduling call, before service,
            with the allocation, the grid and the flows.

    Returns:
        The run's RunReport.

    Raises:
        ScenarioError: If the scenario is invalid.
        ValueError: If the scheduler name is unknown.
    """
    if seed is not None:
        scenario = scenario.with_seed(seed)
    require_valid(scenario)
    scheduler = _scheduler_for(scheduler_name, scenario, utility_fn)

    flows = build_flows(scenario)
    flow_view = tuple(flows)
    procs = build_processes(scenario)
    channel = ChannelModel.from_scenario(scenario)
    params = scenario.pf_params
    d = scenario.tti_duration
    n = scenario.num_ttis

    served_bits = np.zeros((len(flows), n), dtype=np.int64)
    delays: list[list[float]] = [[] for _ in flows]
    runtimes = np.zeros(n)
    log_rows: Optional[list[tuple]] = [] if decision_log is not None else None
    debug = logger.isEnabledFor(logging.DEBUG)

    clock = TtiClock(0, d)
    for t in range(n):
        clock = clock.at(t)
        for flow, proc in zip(flows, procs):
            flow.bytes_served_this_tti = 0
            pkts = arrivals_at(proc, clock)
            if pkts:
                enqueue(flow, pkts)

        grid = grid_for_tti(channel, t)
        allocation = scheduler.schedule(SchedulerInput(clock, flow_view, grid))
        runtimes[t] = allocation.decision_time
        if on_allocation is not None:
            on_allocation(allocation, grid, flow_view)

        for flow_id, grant in allocation.grants.items():
            flow = flows[flow_id]
            for pkt in serve(flow, grant.bytes, t):
                delays[flow_id].append(packet_delay(pkt, d))
            served_bits[flow_id, t] = flow.bytes_served_this_tti * 8
            if log_rows is not None:
                log_rows.append(
                    (t, scheduler.name, flow_id, grant.metric, grant.prbs, grant.bytes)
                )
        for flow in flows:
            update_ema(flow, flow.bytes_served_this_tti * 8, params, d)

        if debug:
            logger.debug(
                "TTI %d: %d grants, %d PRBs, %d bytes",
                t, len(allocation.grants), allocation.total_prbs, allocation.total_bytes,
            )

    traces = [
        FlowTrace(
            flow_id=f.flow_id,
            ue_id=f.ue_id,
            role=f.profile.name,
            label=f.label,
            qfi=f.profile.qfi,
            tti_duration=d,
            delay_bound=f.profile.delay_bound,
            gbr=f.profile.gbr,
            offered_load=f.profile.offered_load,
            arrivals=f.arrivals,
            departures=f.departures,
            drops=f.drops,
            residual=len(f.queue),
            delays=np.asarray(delays[f.flow_id], dtype=float),
            served_bits=served_bits[f.flow_id],
        )
        for f in flows
    ]
    report = build_run_report(
        traces, scheduler.name, scenario.seed, runtimes, scenario.gbr_window, config
    )

    if log_rows is not None:
        decision_log.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(log_rows, columns=DECISION_LOG_COLUMNS).to_csv(decision_log, index=False)
        logger.info("Wrote %d scheduling decisions to %s", len(log_rows), decision_log)
    if trace_dir is not None:
        dump_arrival_trace(procs, n, trace_dir / "arrivals.csv", d)
        dump_channel_realization(channel, n, trace_dir / "channel.csv")

    logger.info(
        "%s seed=%d%s: %d flows, %d TTIs, %.3f Mbit/s served, mean call %.1f us",
        scheduler.name,
        scenario.seed,
        f" [{config}]" if config else "",
        len(flows),
        n,
        report.total_throughput / 1e6,
        report.runtime_mean * 1e6,
    )
    return report
