"""Per-flow KPIs computed from run traces."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from src.model import Packet

# Relative slack when comparing float delays or rates against a bound
_REL_TOL = 1e-9


@dataclass
class FlowTrace:
    """Everything recorded about one flow during one run."""

    flow_id: int
    ue_id: int
    role: str
    label: str
    qfi: int
    tti_duration: float
    delay_bound: Optional[float]
    gbr: Optional[float]
    offered_load: float
    arrivals: int = 0
    departures: int = 0
    drops: int = 0
    residual: int = 0
    delays: np.ndarray = field(default_factory=lambda: np.zeros(0))
    served_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def duration(self) -> float:
        return len(self.served_bits) * self.tti_duration

    @property
    def throughput(self) -> float:
        if len(self.served_bits) == 0:
            return 0.0
        return float(self.served_bits.sum()) / self.duration


def packet_delay(p: Packet, tti_duration: float) -> float:
    """Delay in seconds; service completes at the end of the departure TTI.

    Raises:
        ValueError: If the packet has not departed.
    """
    if p.departure_tti is None:
        raise ValueError(f"packet of flow {p.flow_id} arrived at TTI {p.arrival_tti} is still pending")
    return (p.departure_tti - p.arrival_tti + 1) * tti_duration


def deadline_misses(trace: FlowTrace, delay_bound: Optional[float] = None) -> int:
    """Packets delivered after the delay bound plus packets dropped on arrival.

    Raises:
        ValueError: If neither the trace nor the caller gives a bound.
    """
    bound = trace.delay_bound if delay_bound is None else delay_bound
    if bound is None:
        raise ValueError(f"flow {trace.flow_id} has no delay bound")
    late = int(np.count_nonzero(trace.delays > bound * (1 + _REL_TOL)))
    return late + trace.drops


def violation_ratio(trace: FlowTrace, delay_bound: Optional[float] = None) -> Optional[float]:
    """Share of arrived packets that missed the delay bound; drops count as misses.

    Args:
        trace: The flow's trace.
        delay_bound: Override for the flow's own bound.

    Returns:
        The ratio in [0, 1], or None when the flow has no delay bound.
    """
    bound = trace.delay_bound if delay_bound is None else delay_bound
    if bound is None:
        return None
    if trace.arrivals == 0:
        return 0.0
    return deadline_misses(trace, bound) / trace.arrivals


def gbr_satisfaction(trace: FlowTrace, window: float) -> Optional[float]:
    """Fraction of consecutive windows in which the served rate met the GBR.

    Only complete windows count; a run shorter than one window is judged
    as a single window of its own length.

    Returns:
        The ratio in [0, 1], or None for non-GBR flows.
    """
    if trace.gbr is None:
        return None
    if window <= 0:
        raise ValueError(f"window must be > 0 (got {window})")
    served = trace.served_bits
    if len(served) == 0:
        return 0.0
    window_ttis = max(1, round(window / trace.tti_duration))
    full = len(served) // window_ttis
    threshold = trace.gbr * (1 - _REL_TOL)
    if full == 0:
        return 1.0 if served.sum() / trace.duration >= threshold else 0.0
    per_window = served[: full * window_ttis].reshape(full, window_ttis).sum(axis=1)
    rates = per_window / (window_ttis * trace.tti_duration)
    return float(np.mean(rates >= threshold))


def jain_index(throughputs: Sequence[float]) -> Optional[float]:
    """Jain's fairness index (sum x)^2 / (n * sum x^2).

    Returns:
        A value in [1/n, 1], or None when the input is empty or all zero.

    Raises:
        ValueError: On negative throughputs.
    """
    x = np.asarray(throughputs, dtype=float)
    if x.size == 0:
        return None
    if np.any(x < 0):
        raise ValueError("throughputs must be non-negative")
    total = x.sum()
    if total == 0:
        return None
    return float(total * total / (x.size * np.square(x).sum()))


def fair_shares(demands: Sequence[float], capacity: float) -> np.ndarray:
    """Max-min fair split of `capacity` across flows with the given demands."""
    d = np.asarray(demands, dtype=float)
    shares = np.zeros_like(d)
    remaining = capacity
    order = np.argsort(d, kind="stable")
    for i, idx in enumerate(order):
        left = len(order) - i
        share = remaining / left
        shares[idx] = min(d[idx], share)
        remaining -= shares[idx]
    return shares


def jain_index_fair(throughputs: Sequence[float], demands: Sequence[float]) -> Optional[float]:
    """Jain's index over throughput normalised by each flow's max-min fair share.

    The shares split the throughput the cell actually delivered, so a
    flow that gets exactly its fair share scores 1 regardless of how
    large its demand is. Flows with no demand are left out.
    """
    t = np.asarray(throughputs, dtype=float)
    shares = fair_shares(demands, float(t.sum()))
    mask = shares > 0
    if not mask.any():
        return None
    return jain_index(t[mask] / shares[mask])
