"""Downlink schedulers.

Every policy follows the same per-TTI pass:
  1. take the flows with queued bytes
  2. rank them (the only policy-specific step)
  3. walk the ranking, giving each flow the fewest PRBs that cover
     min(queued bytes, per-TTI rate-cap budget) until PRBs run out

Policies:
  qos-pf           QoS-aware proportional fairness, U_i / R_i
  max-ci           best channel quality first
  static-priority  strict priority level, round-robin within a level
  round-robin      least recently served first
"""

import logging
import math
import time
from typing import Optional

from src.model import (
    Allocation,
    FlowState,
    Grant,
    QosPfParams,
    SchedulerInput,
)
from src.sched.utility import UtilityFn, pf_metric, utility

logger = logging.getLogger(__name__)

_NEVER = -1


def rate_cap_bytes(flow: FlowState, tti_duration: float) -> Optional[int]:
    """Per-TTI byte budget of a flow's rate cap, or None when uncapped."""
    cap = flow.profile.rate_cap
    if cap is None:
        return None
    return int(cap * tti_duration // 8)


def allocate_greedy(
    inp: SchedulerInput,
    ranked: list[tuple[FlowState, float]],
) -> dict[int, Grant]:
    """Assign PRBs to flows in ranked order.

    Args:
        inp: Scheduler input; its grid is consumed.
        ranked: (flow, metric) pairs, best first.

    Returns:
        Grants keyed by flow_id. Flows that would receive nothing are omitted.
    """
    grid = inp.grid
    grants: dict[int, Grant] = {}
    for flow, metric in ranked:
        free = grid.unassigned()
        if free == 0:
            break
        want = flow.queued_bytes
        cap = rate_cap_bytes(flow, inp.clock.tti_duration)
        if cap is not None:
            want = min(want, cap)
        if want <= 0:
            continue
        per_prb = grid.ue_bits_per_prb(flow.ue_id)
        prbs = min(math.ceil(want * 8 / per_prb), free)
        nbytes = min(want, grid.capacity_bits(flow.ue_id, prbs) // 8)
        if nbytes <= 0:
            continue
        grid.assign(flow.flow_id, prbs)
        grants[flow.flow_id] = Grant(flow.flow_id, prbs, nbytes, metric)
    return grants


class Scheduler:
    """Base class: subclasses implement `rank`; `schedule` times the whole pass."""

    name = "base"

    def rank(self, inp: SchedulerInput, active: list[FlowState]) -> list[tuple[FlowState, float]]:
        raise NotImplementedError

    def observe(self, allocation: Allocation) -> None:
        """Hook for policies that keep state across TTIs."""

    def schedule(self, inp: SchedulerInput) -> Allocation:
        started = time.perf_counter()
        active = [f for f in inp.flows if f.queued_bytes > 0]
        grants = allocate_greedy(inp, self.rank(inp, active)) if active else {}
        allocation = Allocation(self.name, inp.clock.tti_index, grants)
        self.observe(allocation)
        allocation.decision_time = time.perf_counter() - started
        return allocation


class QosPfScheduler(Scheduler):
    """Ranks flows by M = U / R, ties by priority level then flow_id.

    `utility_fn` can replace the composite utility with another model of
    the same signature.
    """

    name = "qos-pf"

    def __init__(self, params: Optional[QosPfParams] = None, utility_fn: UtilityFn = utility):
        self.params = params or QosPfParams()
        self.utility_fn = utility_fn

    def rank(self, inp: SchedulerInput, active: list[FlowState]) -> list[tuple[FlowState, float]]:
        scored = [
            (f, pf_metric(f, inp.clock, self.params, self.utility_fn)) for f in active
        ]
        scored.sort(key=lambda fm: (-fm[1], fm[0].profile.priority_level, fm[0].flow_id))
        return scored


class MaxCiScheduler(Scheduler):
    """Ranks flows by their UE's bits per PRB; no QoS awareness."""

    name = "max-ci"

    def rank(self, inp: SchedulerInput, active: list[FlowState]) -> list[tuple[FlowState, float]]:
        grid = inp.grid
        scored = [(f, float(grid.ue_bits_per_prb(f.ue_id))) for f in active]
        scored.sort(key=lambda fm: (-fm[1], fm[0].flow_id))
        return scored


class _LastServedMixin:
    """Tracks the TTI each flow was last granted bytes."""

    def _init_cursor(self) -> None:
        self.last_served: dict[int, int] = {}

    def observe(self, allocation: Allocation) -> None:
        for flow_id in allocation.grants:
            self.last_served[flow_id] = allocation.tti


class StaticPriorityScheduler(_LastServedMixin, Scheduler):
    """Strict priority by level; within a level the least recently served goes first."""

    name = "static-priority"

    def __init__(self) -> None:
        self._init_cursor()

    def rank(self, inp: SchedulerInput, active: list[FlowState]) -> list[tuple[FlowState, float]]:
        ranked = sorted(
            active,
            key=lambda f: (
                f.profile.priority_level,
                self.last_served.get(f.flow_id, _NEVER),
                f.flow_id,
            ),
        )
        return [(f, float(f.profile.priority_level)) for f in ranked]


class RoundRobinScheduler(_LastServedMixin, Scheduler):
    """Least recently served first, ignoring priority and channel."""

    name = "round-robin"

    def __init__(self) -> None:
        self._init_cursor()

    def rank(self, inp: SchedulerInput, active: list[FlowState]) -> list[tuple[FlowState, float]]:
        ranked = sorted(
            active, key=lambda f: (self.last_served.get(f.flow_id, _NEVER), f.flow_id)
        )
        return [(f, float(self.last_served.get(f.flow_id, _NEVER))) for f in ranked]


SCHEDULERS: dict[str, type[Scheduler]] = {
    cls.name: cls
    for cls in (QosPfScheduler, MaxCiScheduler, StaticPriorityScheduler, RoundRobinScheduler)
}


def make_scheduler(name: str, params: Optional[QosPfParams] = None) -> Scheduler:
    """Create a fresh scheduler instance; one per run.

    Raises:
        ValueError: If the name is not a known policy.
    """
    try:
        cls = SCHEDULERS[name]
    except KeyError:
        raise ValueError(
            f"unknown scheduler {name!r}; choose from {', '.join(SCHEDULERS)}"
        ) from None
    if cls is QosPfScheduler:
        return QosPfScheduler(params)
    return cls()
