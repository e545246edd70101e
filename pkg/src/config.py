"""Configuration constants for the QoS-aware scheduling simulator.

Scenario defaults live here as typed constants. Deployment settings
(output directory, log level, worker count) are resolved from:
  1. Environment variables (os.getenv), for CI jobs and containers
  2. .env file (python-dotenv), for local development
  3. Defaults below
"""

import logging
import os
from typing import Final

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Time and radio grid
# ---------------------------------------------------------------------------
TTI_DURATION: Final[float] = 0.001  # seconds
NUM_PRBS: Final[int] = 25
CELL_CAPACITY: Final[float] = 20e6  # bits/second; 800 bits/PRB at 1 ms
SIM_DURATION: Final[float] = 10.0
NUM_UES: Final[int] = 6

# Per-UE channel quality spread. UE 0 gets the high end.
CHANNEL_VARIATIONS: Final[tuple[str, ...]] = ("none", "static_per_ue", "block_fading")
CHANNEL_VARIATION: Final[str] = "static_per_ue"
CHANNEL_MULTIPLIER_RANGE: Final[tuple[float, float]] = (0.6, 1.0)
CHANNEL_BLOCK_TTIS: Final[int] = 100

# ---------------------------------------------------------------------------
# Flow state
# ---------------------------------------------------------------------------
BUFFER_CAPACITY: Final[int] = 500  # packets per flow, tail drop
AVG_THROUGHPUT_FLOOR: Final[float] = 1.0  # bits/second

START_OFFSET_POLICIES: Final[tuple[str, ...]] = ("uniform", "zero")

# ---------------------------------------------------------------------------
# QoS-PF parameters
# ---------------------------------------------------------------------------
EMA_WINDOW_TTIS: Final[int] = 100
D_MAX_CAP: Final[float] = 10.0
EPSILON_TIME: Final[float] = 1e-4  # seconds

# Named (alpha, beta, gamma) configurations for the sensitivity sweep
WEIGHT_CONFIGS: Final[dict[str, tuple[float, float, float]]] = {
    "delay-tuned": (0.7, 0.2, 0.1),
    "balanced": (0.4, 0.3, 0.3),
    "fairness-tuned": (0.2, 0.2, 0.6),
}
DEFAULT_WEIGHTS: Final[str] = "balanced"

# ---------------------------------------------------------------------------
# Traffic
# ---------------------------------------------------------------------------
ARRIVAL_KINDS: Final[tuple[str, ...]] = ("periodic", "variable_video")

VIDEO_FRAME_INTERVAL: Final[float] = 1.0 / 30.0
VIDEO_PACKET_SIZE: Final[int] = 1000
VIDEO_BURST_RANGE: Final[tuple[int, int]] = (5, 40)  # packets per frame, inclusive

# Reference QoS profiles, keyed by role. Values not listed fall back to
# the QfiProfile defaults (no rate cap, no explicit user weight).
REFERENCE_PROFILES: Final[dict[str, dict[str, object]]] = {
    "control": {
        "qfi": 1,
        "five_qi": 85,
        "packet_size": 64,
        "arrival": "periodic",
        "interval": 0.001,
        "delay_bound": 0.005,
        "gbr": 400e3,
        "priority_level": 1,
    },
    "sensor": {
        "qfi": 2,
        "five_qi": 6,
        "packet_size": 128,
        "arrival": "periodic",
        "interval": 0.010,
        "delay_bound": 0.050,
        "gbr": 64e3,
        "priority_level": 2,
    },
    "video": {
        "qfi": 3,
        "five_qi": 9,
        "packet_size": VIDEO_PACKET_SIZE,
        "arrival": "variable_video",
        "interval": VIDEO_FRAME_INTERVAL,
        "delay_bound": 0.050,
        "gbr": None,
        "priority_level": 4,
        "burst_min": VIDEO_BURST_RANGE[0],
        "burst_max": VIDEO_BURST_RANGE[1],
    },
}

# ---------------------------------------------------------------------------
# Metrics and experiments
# ---------------------------------------------------------------------------
GBR_WINDOW: Final[float] = 0.100  # seconds
CONFIDENCE_LEVEL: Final[float] = 0.95

SCHEDULER_NAMES: Final[tuple[str, ...]] = (
    "qos-pf",
    "max-ci",
    "static-priority",
    "round-robin",
)
DEFAULT_SCHEDULERS: Final[tuple[str, ...]] = ("qos-pf", "max-ci", "static-priority")

MONTE_CARLO_RUNS: Final[int] = 20
BASE_SEED: Final[int] = 1
UE_SWEEP: Final[tuple[int, ...]] = (5, 10, 20, 40)

# ---------------------------------------------------------------------------
# Deployment settings
# ---------------------------------------------------------------------------
_DEFAULT_OUTPUT_DIR = "results"
_DEFAULT_LOG_LEVEL = "INFO"


def _resolve_setting(name: str, default: str) -> str:
    """Resolve a deployment setting from the environment.

    Args:
        name: Environment variable name.
        default: Value used when the variable is unset or empty.

    Returns:
        The configured value as a string.
    """
    value = os.getenv(name)
    if value:
        logger.debug("%s loaded from environment variable.", name)
        return value
    return default


def _resolve_max_workers() -> int:
    """Worker processes for batch runs; 1 runs everything in-process."""
    raw = _resolve_setting("SIM_MAX_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        logger.warning("SIM_MAX_WORKERS=%r is not an integer; using 1.", raw)
        return 1
    return max(workers, 1)


OUTPUT_DIR: str = _resolve_setting("SIM_OUTPUT_DIR", _DEFAULT_OUTPUT_DIR)
LOG_LEVEL: str = _resolve_setting("SIM_LOG_LEVEL", _DEFAULT_LOG_LEVEL).upper()
MAX_WORKERS: int = _resolve_max_workers()
