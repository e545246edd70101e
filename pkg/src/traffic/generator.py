"""Per-flow packet arrival processes and FIFO queue handling.

Two application classes are modelled:
  - periodic: one packet every `period`, first at `start_offset`
    (control loops, sensor telemetry)
  - variable_video: a burst of N packets every frame interval, N drawn
    uniformly from [burst_min, burst_max] (open-loop video source)

An event at time `t` belongs to the TTI whose interval [k*d, (k+1)*d)
contains it. Burst sizes are drawn from a generator seeded by
(seed, flow_id, frame index), so arrivals are a pure function of the
process parameters and the TTI.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from src.model import FlowState, Packet, QfiProfile, Scenario, TtiClock

logger = logging.getLogger(__name__)

# Slack for float comparisons between event times and TTI edges
_EPS = 1e-9

# Stream tags keep offset and burst draws independent of each other
_OFFSET_STREAM = 1
_BURST_STREAM = 2


@dataclass(frozen=True)
class ArrivalProcess:
    flow_id: int
    kind: str
    packet_size: int
    period: float
    start_offset: float = 0.0
    burst_min: int = 1
    burst_max: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError(f"flow {self.flow_id}: period must be > 0 (got {self.period})")
        if self.kind not in ("periodic", "variable_video"):
            raise ValueError(f"flow {self.flow_id}: unknown arrival kind {self.kind!r}")

    @classmethod
    def for_flow(
        cls,
        flow_id: int,
        profile: QfiProfile,
        seed: int,
        policy: str = "uniform",
    ) -> "ArrivalProcess":
        """Build the arrival process of one flow for one run.

        The start offset comes from the profile when set; otherwise it is
        drawn once per (seed, flow) uniformly over [0, period), or is 0
        under the "zero" policy.
        """
        if profile.start_offset is not None:
            offset = profile.start_offset
        elif policy == "zero":
            offset = 0.0
        else:
            rng = np.random.default_rng((seed, flow_id, _OFFSET_STREAM))
            offset = float(rng.uniform(0.0, profile.interval))
        return cls(
            flow_id=flow_id,
            kind=profile.arrival,
            packet_size=profile.packet_size,
            period=profile.interval,
            start_offset=offset,
            burst_min=profile.burst_min if profile.arrival == "variable_video" else 1,
            burst_max=profile.burst_max if profile.arrival == "variable_video" else 1,
            seed=seed,
        )

    def events_in(self, start: float, end: float) -> range:
        """Indices k of events at start_offset + k*period inside [start, end)."""
        first = math.ceil((start - self.start_offset) / self.period - _EPS)
        stop = math.ceil((end - self.start_offset) / self.period - _EPS)
        return range(max(first, 0), max(stop, 0))

    def burst_size(self, frame: int) -> int:
        if self.kind == "periodic":
            return 1
        rng = np.random.default_rng((self.seed, self.flow_id, _BURST_STREAM, frame))
        return int(rng.integers(self.burst_min, self.burst_max, endpoint=True))


def arrivals_at(proc: ArrivalProcess, tti: TtiClock) -> list[Packet]:
    """Packets a process emits during one TTI, stamped with that TTI's index."""
    start = tti.now
    events = proc.events_in(start, start + tti.tti_duration)
    if not events:
        return []
    count = sum(proc.burst_size(k) for k in events)
    return [Packet(proc.flow_id, proc.packet_size, tti.tti_index) for _ in range(count)]


def enqueue(flow: FlowState, pkts: Iterable[Packet]) -> FlowState:
    """Append packets FIFO; packets that do not fit the buffer are tail-dropped.

    Every offered packet counts as an arrival, dropped or not.
    """
    for pkt in pkts:
        flow.arrivals += 1
        if len(flow.queue) >= flow.buffer_capacity:
            flow.drops += 1
            continue
        flow.queue.append(pkt)
        flow.queued_bytes += pkt.remaining_bytes
    return flow


def serve(flow: FlowState, nbytes: int, tti: int) -> list[Packet]:
    """Drain up to `nbytes` from the head of the queue.

    Partially served packets stay at the head with reduced remaining_bytes.

    Returns:
        Packets that completed in this TTI, with departure_tti set.
    """
    departed: list[Packet] = []
    budget = min(nbytes, flow.queued_bytes)
    flow.bytes_served_this_tti = budget
    flow.queued_bytes -= budget
    flow.cumulative_bits_served += budget * 8
    while budget > 0:
        head = flow.queue[0]
        take = min(budget, head.remaining_bytes)
        head.remaining_bytes -= take
        budget -= take
        if head.remaining_bytes == 0:
            head.departure_tti = tti
            flow.queue.popleft()
            departed.append(head)
    flow.departures += len(departed)
    return departed


def build_processes(scenario: Scenario) -> list[ArrivalProcess]:
    """Arrival processes for every flow of a scenario, in flow_id order."""
    procs: list[ArrivalProcess] = []
    for ue_id in range(scenario.num_ues):
        for idx, profile in enumerate(scenario.flows_per_ue):
            flow_id = scenario.flow_id(ue_id, idx)
            procs.append(
                ArrivalProcess.for_flow(
                    flow_id, profile, scenario.seed, scenario.start_offset_policy
                )
            )
    return procs


def dump_arrival_trace(
    procs: list[ArrivalProcess],
    num_ttis: int,
    path: Path,
    tti_duration: float,
) -> Path:
    """Write `tti,flow_id,packet_size` rows, one per emitted packet."""
    rows: list[tuple[int, int, int]] = []
    clock = TtiClock(0, tti_duration)
    for t in range(num_ttis):
        clock = clock.at(t)
        for proc in procs:
            rows.extend((t, p.flow_id, p.size) for p in arrivals_at(proc, clock))
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["tti", "flow_id", "packet_size"]).to_csv(path, index=False)
    logger.info("Wrote %d arrivals to %s", len(rows), path)
    return path
