"""Abstract per-UE channel: PRBs per TTI and bits each PRB carries for a UE.

The nominal efficiency is derived from the cell capacity so that a full
grid at multiplier 1.0 delivers exactly the configured rate. Per-UE
quality varies by a multiplier:
  - none:           1.0 for every UE and TTI
  - static_per_ue:  evenly spaced from hi (UE 0) down to lo (last UE)
  - block_fading:   uniform in [lo, hi], redrawn every `block_ttis` TTIs
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd

from src.model import ResourceGrid, Scenario

logger = logging.getLogger(__name__)

_FADING_STREAM = 3


@dataclass(frozen=True)
class ChannelModel:
    num_ues: int
    num_prbs: int
    base_efficiency: float
    variation: str = "none"
    multiplier_lo: float = 1.0
    multiplier_hi: float = 1.0
    block_ttis: int = 100
    seed: int = 0

    @classmethod
    def from_scenario(cls, s: Scenario) -> "ChannelModel":
        return cls(
            num_ues=s.num_ues,
            num_prbs=s.num_prbs,
            base_efficiency=s.base_efficiency,
            variation=s.channel_variation,
            multiplier_lo=s.channel_multiplier_lo,
            multiplier_hi=s.channel_multiplier_hi,
            block_ttis=s.channel_block_ttis,
            seed=s.seed,
        )

    @property
    def nominal_bits_per_prb(self) -> int:
        return max(1, round(self.base_efficiency))


def _static_multiplier(m: ChannelModel, ue_id: int) -> float:
    if m.num_ues == 1:
        return m.multiplier_hi
    step = (m.multiplier_hi - m.multiplier_lo) / (m.num_ues - 1)
    return m.multiplier_hi - ue_id * step


@lru_cache(maxsize=65536)
def _fading_multiplier(m: ChannelModel, ue_id: int, block: int) -> float:
    rng = np.random.default_rng((m.seed, ue_id, _FADING_STREAM, block))
    return float(rng.uniform(m.multiplier_lo, m.multiplier_hi))


def bits_per_prb(m: ChannelModel, ue_id: int, tti: int) -> int:
    """Bits one PRB carries for a UE in a TTI; always >= 1.

    Raises:
        ValueError: If ue_id is not a UE of this model.
    """
    if not 0 <= ue_id < m.num_ues:
        raise ValueError(f"unknown UE {ue_id}: model has UEs 0..{m.num_ues - 1}")
    if m.variation == "none":
        multiplier = 1.0
    elif m.variation == "static_per_ue":
        multiplier = _static_multiplier(m, ue_id)
    elif m.variation == "block_fading":
        multiplier = _fading_multiplier(m, ue_id, tti // m.block_ttis)
    else:
        raise ValueError(f"unknown channel variation {m.variation!r}")
    return max(1, round(m.base_efficiency * multiplier))


@lru_cache(maxsize=4096)
def _ue_capacities(m: ChannelModel, block: int) -> dict[int, int]:
    tti = block * m.block_ttis
    return {ue: bits_per_prb(m, ue, tti) for ue in range(m.num_ues)}


def grid_for_tti(m: ChannelModel, tti: int) -> ResourceGrid:
    """A fresh grid of unassigned PRBs with this TTI's per-UE capacities."""
    # Capacities only change at fading block edges
    block = tti // m.block_ttis if m.variation == "block_fading" else 0
    return ResourceGrid(
        tti=tti,
        num_prbs=m.num_prbs,
        bits_per_prb=_ue_capacities(m, block),
        nominal_bits_per_prb=m.nominal_bits_per_prb,
    )


def dump_channel_realization(m: ChannelModel, num_ttis: int, path: Path) -> Path:
    """Write `tti,ue_id,bits_per_prb` rows for every TTI and UE."""
    rows = [
        (t, ue, bits_per_prb(m, ue, t)) for t in range(num_ttis) for ue in range(m.num_ues)
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["tti", "ue_id", "bits_per_prb"]).to_csv(path, index=False)
    logger.info("Wrote channel realization (%d rows) to %s", len(rows), path)
    return path
