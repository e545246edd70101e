"""QoS-PF metric components.

    M_i(t) = U_i(t) / R_i(t)
    U_i(t) = alpha_i * D_i(t) + beta_i * G_i(t) + gamma_i * P_i

D is delay urgency, G the GBR deficit and P the priority weight, each
normalised to [0, 1] so the per-flow weights are comparable. R is the
EMA throughput, floored so the metric stays finite.
"""

from typing import Callable

from src.config import TTI_DURATION
from src.model import FlowState, QosPfParams, TtiClock


def urgency_from_wait(wait: float, delay_bound: float, params: QosPfParams) -> float:
    """Delay urgency for a head-of-line wait against a delay bound.

    Inverse of the remaining time to deadline, capped at d_max_cap and
    scaled to [0, 1]; saturates once remaining time <= bound / d_max_cap.
    """
    remaining = max(params.epsilon_time, delay_bound - wait)
    return min(params.d_max_cap, delay_bound / remaining) / params.d_max_cap


def delay_urgency(flow: FlowState, clock: TtiClock, params: QosPfParams) -> float:
    """D_i(t): 0 for flows without a delay bound or with an empty queue."""
    bound = flow.profile.delay_bound
    if bound is None or not flow.queue:
        return 0.0
    return urgency_from_wait(flow.head_wait(clock), bound, params)


def gbr_deficit(flow: FlowState, params: QosPfParams) -> float:
    """G_i(t): 1 - R/GBR clamped to [0, 1]; 0 for non-GBR flows."""
    gbr = flow.profile.gbr
    if gbr is None:
        return 0.0
    if flow.avg_throughput <= params.avg_throughput_floor:
        return 1.0
    return min(1.0, max(0.0, 1.0 - flow.avg_throughput / gbr))


def priority_weight(flow: FlowState, params: QosPfParams) -> float:
    """P_i: explicit user weight when set, else the normalised priority level.

    Raises:
        ValueError: If priority_level < 1.
    """
    profile = flow.profile
    if profile.priority_level < 1:
        raise ValueError(
            f"flow {flow.flow_id}: priority_level must be >= 1 (got {profile.priority_level})"
        )
    if profile.user_weight is not None:
        return profile.user_weight
    return params.priority_normalizer(profile.priority_level)


def utility(flow: FlowState, clock: TtiClock, params: QosPfParams) -> float:
    p = flow.profile
    return (
        p.alpha * delay_urgency(flow, clock, params)
        + p.beta * gbr_deficit(flow, params)
        + p.gamma * priority_weight(flow, params)
    )


UtilityFn = Callable[[FlowState, TtiClock, QosPfParams], float]


def pf_metric(
    flow: FlowState,
    clock: TtiClock,
    params: QosPfParams,
    utility_fn: UtilityFn = utility,
) -> float:
    """M_i(t) = U_i(t) / max(R_i(t), floor)."""
    return utility_fn(flow, clock, params) / max(flow.avg_throughput, params.avg_throughput_floor)


def update_ema(
    flow: FlowState,
    served_bits: float,
    params: QosPfParams,
    tti_duration: float = TTI_DURATION,
) -> float:
    """Fold one TTI of service into the flow's EMA throughput.

    Applied every TTI to every flow, served or not.
    """
    w = 1.0 / params.ema_window_ttis
    rate = served_bits / tti_duration
    flow.avg_throughput = max(
        (1.0 - w) * flow.avg_throughput + w * rate,
        params.avg_throughput_floor,
    )
    return flow.avg_throughput
