"""Core domain types shared by every simulator module.

Configuration types (QfiProfile, Scenario, QosPfParams) are immutable
after construction and safe to hand to worker processes. Per-run state
(Packet, FlowState, ResourceGrid) is mutable and owned by a single run.
"""

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from src.config import (
    AVG_THROUGHPUT_FLOOR,
    BUFFER_CAPACITY,
    CELL_CAPACITY,
    CHANNEL_BLOCK_TTIS,
    CHANNEL_MULTIPLIER_RANGE,
    CHANNEL_VARIATION,
    D_MAX_CAP,
    EMA_WINDOW_TTIS,
    EPSILON_TIME,
    GBR_WINDOW,
    NUM_PRBS,
    NUM_UES,
    SIM_DURATION,
    TTI_DURATION,
    VIDEO_BURST_RANGE,
    WEIGHT_CONFIGS,
)

_BALANCED = WEIGHT_CONFIGS["balanced"]


@dataclass(frozen=True)
class TtiClock:
    """Discrete scheduling time: a TTI index and the TTI length in seconds."""

    tti_index: int = 0
    tti_duration: float = TTI_DURATION

    def __post_init__(self) -> None:
        if self.tti_index < 0:
            raise ValueError(f"tti_index must be >= 0 (got {self.tti_index})")
        if self.tti_duration <= 0:
            raise ValueError(f"tti_duration must be > 0 (got {self.tti_duration})")

    @property
    def now(self) -> float:
        """Start of the current TTI in seconds."""
        return self.tti_index * self.tti_duration

    def advance(self) -> "TtiClock":
        return replace(self, tti_index=self.tti_index + 1)

    def at(self, tti_index: int) -> "TtiClock":
        return replace(self, tti_index=tti_index)


@dataclass(frozen=True)
class QfiProfile:
    """Per-flow QoS contract.

    `name` is the role ("control", "sensor", "video") that reports group
    by; `qfi` and `five_qi` are carried as labels only. `interval` is the
    packet period for periodic flows and the frame interval for video.
    """

    name: str
    qfi: int
    five_qi: int
    packet_size: int
    arrival: str = "periodic"
    interval: float = TTI_DURATION
    delay_bound: Optional[float] = None
    gbr: Optional[float] = None
    priority_level: int = 1
    alpha: float = _BALANCED[0]
    beta: float = _BALANCED[1]
    gamma: float = _BALANCED[2]
    rate_cap: Optional[float] = None
    user_weight: Optional[float] = None
    burst_min: int = VIDEO_BURST_RANGE[0]
    burst_max: int = VIDEO_BURST_RANGE[1]
    start_offset: Optional[float] = None

    @property
    def is_gbr(self) -> bool:
        return self.gbr is not None

    @property
    def offered_load(self) -> float:
        """Mean offered load in bits/second."""
        packets = 1.0
        if self.arrival == "variable_video":
            packets = (self.burst_min + self.burst_max) / 2.0
        return self.packet_size * 8 * packets / self.interval

    def with_weights(self, alpha: float, beta: float, gamma: float) -> "QfiProfile":
        return replace(self, alpha=alpha, beta=beta, gamma=gamma)


def reciprocal_priority(priority_level: int) -> float:
    """Default priority normaliser: level 1 -> 1.0, level 4 -> 0.25."""
    return 1.0 / priority_level


@dataclass(frozen=True)
class QosPfParams:
    """Constants of the QoS-PF metric that the scheduling equations leave open."""

    ema_window_ttis: int = EMA_WINDOW_TTIS
    d_max_cap: float = D_MAX_CAP
    epsilon_time: float = EPSILON_TIME
    avg_throughput_floor: float = AVG_THROUGHPUT_FLOOR
    priority_normalizer: Callable[[int], float] = reciprocal_priority

    def __post_init__(self) -> None:
        if self.ema_window_ttis < 1:
            raise ValueError(f"ema_window_ttis must be >= 1 (got {self.ema_window_ttis})")
        if self.d_max_cap < 1:
            raise ValueError(f"d_max_cap must be >= 1 (got {self.d_max_cap})")
        if self.epsilon_time <= 0:
            raise ValueError(f"epsilon_time must be > 0 (got {self.epsilon_time})")
        if self.avg_throughput_floor <= 0:
            raise ValueError(
                f"avg_throughput_floor must be > 0 (got {self.avg_throughput_floor})"
            )


@dataclass(slots=True)
class Packet:
    flow_id: int
    size: int
    arrival_tti: int
    remaining_bytes: int = field(init=False)
    departure_tti: Optional[int] = None

    def __post_init__(self) -> None:
        self.remaining_bytes = self.size

    @property
    def departed(self) -> bool:
        return self.departure_tti is not None


@dataclass(slots=True)
class FlowState:
    """Live scheduling context of one QoS flow."""

    flow_id: int
    ue_id: int
    profile: QfiProfile
    buffer_capacity: int = BUFFER_CAPACITY
    avg_throughput: float = AVG_THROUGHPUT_FLOOR
    queue: deque = field(default_factory=deque)
    queued_bytes: int = 0
    bytes_served_this_tti: int = 0
    cumulative_bits_served: int = 0
    arrivals: int = 0
    departures: int = 0
    drops: int = 0

    @property
    def label(self) -> str:
        return f"ue{self.ue_id}/{self.profile.name}"

    def head_wait(self, clock: TtiClock) -> float:
        """Seconds the head-of-line packet has waited at the start of this TTI."""
        if not self.queue:
            return 0.0
        return (clock.tti_index - self.queue[0].arrival_tti) * clock.tti_duration


@dataclass(frozen=True)
class Scenario:
    """A single-cell experiment: UEs, their flow profiles, the cell and the run horizon."""

    num_ues: int = NUM_UES
    flows_per_ue: tuple[QfiProfile, ...] = ()
    sim_duration: float = SIM_DURATION
    cell_capacity: float = CELL_CAPACITY
    num_prbs: int = NUM_PRBS
    seed: int = 1
    start_offset_policy: str = "uniform"
    tti_duration: float = TTI_DURATION
    buffer_capacity: int = BUFFER_CAPACITY
    gbr_window: float = GBR_WINDOW
    channel_variation: str = CHANNEL_VARIATION
    channel_multiplier_lo: float = CHANNEL_MULTIPLIER_RANGE[0]
    channel_multiplier_hi: float = CHANNEL_MULTIPLIER_RANGE[1]
    channel_block_ttis: int = CHANNEL_BLOCK_TTIS
    pf_params: QosPfParams = field(default_factory=QosPfParams)

    @property
    def num_ttis(self) -> int:
        return int(round(self.sim_duration / self.tti_duration))

    @property
    def num_flows(self) -> int:
        return self.num_ues * len(self.flows_per_ue)

    @property
    def base_efficiency(self) -> float:
        """Bits per PRB per TTI at nominal channel quality."""
        return self.cell_capacity * self.tti_duration / self.num_prbs

    def flow_id(self, ue_id: int, profile_index: int) -> int:
        return ue_id * len(self.flows_per_ue) + profile_index

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)

    def with_ues(self, num_ues: int) -> "Scenario":
        return replace(self, num_ues=num_ues)

    def with_weights(self, alpha: float, beta: float, gamma: float) -> "Scenario":
        """Apply one (alpha, beta, gamma) configuration to every flow."""
        profiles = tuple(p.with_weights(alpha, beta, gamma) for p in self.flows_per_ue)
        return replace(self, flows_per_ue=profiles)


@dataclass
class ResourceGrid:
    """PRB budget of one TTI and the per-UE bits each PRB carries."""

    tti: int
    num_prbs: int
    bits_per_prb: dict[int, int]
    nominal_bits_per_prb: int
    owners: list = field(init=False)
    _cursor: int = field(init=False, default=0, repr=False)

    def __post_init__(self) -> None:
        self.owners = [None] * self.num_prbs

    def unassigned(self) -> int:
        return self.num_prbs - self._cursor

    def ue_bits_per_prb(self, ue_id: int) -> int:
        try:
            return self.bits_per_prb[ue_id]
        except KeyError:
            raise ValueError(f"UE {ue_id} is not registered in this grid") from None

    def capacity_bits(self, ue_id: int, prbs: int) -> int:
        return prbs * self.ue_bits_per_prb(ue_id)

    def total_nominal_bits(self) -> int:
        return self.num_prbs * self.nominal_bits_per_prb

    def assign(self, flow_id: int, prbs: int) -> range:
        """Give the next `prbs` free PRBs to a flow and return their indices."""
        if prbs < 0 or prbs > self.unassigned():
            raise ValueError(
                f"cannot assign {prbs} PRBs to flow {flow_id}: "
                f"{self.unassigned()} unassigned"
            )
        start = self._cursor
        for i in range(start, start + prbs):
            self.owners[i] = flow_id
        self._cursor += prbs
        return range(start, start + prbs)


@dataclass(frozen=True)
class Grant:
    flow_id: int
    prbs: int
    bytes: int
    metric: float = 0.0


@dataclass
class Allocation:
    """Scheduler output for one TTI."""

    scheduler: str
    tti: int
    grants: dict[int, Grant] = field(default_factory=dict)
    decision_time: float = 0.0

    @property
    def total_prbs(self) -> int:
        return sum(g.prbs for g in self.grants.values())

    @property
    def total_bytes(self) -> int:
        return sum(g.bytes for g in self.grants.values())


@dataclass(frozen=True)
class SchedulerInput:
    """Read-only view handed to a scheduler: the clock, candidate flows and the grid.

    Schedulers must not mutate the flows; service is applied by the
    simulation loop from the returned Allocation.
    """

    clock: TtiClock
    flows: tuple[FlowState, ...]
    grid: ResourceGrid
