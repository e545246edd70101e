"""Scenario construction, validation and the INI configuration format.

File layout:
    [scenario]          globals (UE count, horizon, cell, channel spread)
    [scheduler]         QoS-PF constants; alpha/beta/gamma act as flow defaults
    [flow.<role>]       one section per QoS profile, applied to every UE
    [experiment]        optional batch settings (runs, seeds, schedulers)
    [weights.<name>]    optional named (alpha, beta, gamma) configurations

Unknown sections or keys are rejected.
"""

import configparser
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional

from src.config import (
    ARRIVAL_KINDS,
    CHANNEL_VARIATIONS,
    REFERENCE_PROFILES,
    START_OFFSET_POLICIES,
    WEIGHT_CONFIGS,
)
from src.model import QfiProfile, QosPfParams, Scenario

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for malformed configuration files or values."""


class ScenarioError(ValueError):
    """Raised when a scenario fails validation; carries every violation."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = list(violations)
        super().__init__(
            "invalid scenario:\n" + "\n".join(f"  - {v}" for v in self.violations)
        )


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------
def build_profile(name: str, values: dict[str, Any]) -> QfiProfile:
    """Create a QfiProfile for a role from a mapping of field values."""
    return QfiProfile(name=name, **values)


def reference_profiles() -> tuple[QfiProfile, ...]:
    return tuple(build_profile(name, dict(v)) for name, v in REFERENCE_PROFILES.items())


def reference_scenario(**overrides: Any) -> Scenario:
    """The evaluation scenario: 6 UEs x (control, sensor, video), 20 Mbps, 10 s.

    Keyword arguments override Scenario fields.
    """
    return replace(Scenario(flows_per_ue=reference_profiles()), **overrides)


def validate_weights(name: str, weights: tuple[float, float, float]) -> None:
    """Reject a weight configuration that cannot drive QoS-PF.

    Raises:
        ValueError: If any weight is outside [0, 1] or all three are zero.
    """
    if len(weights) != 3:
        raise ValueError(f"weights {name!r} must have three values (got {len(weights)})")
    if any(not 0.0 <= w <= 1.0 for w in weights):
        raise ValueError(f"weights {name!r} must lie in [0, 1] (got {weights})")
    if sum(weights) <= 0:
        raise ValueError(f"weights {name!r} sum to 0; QoS-PF utility would vanish")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------
def _check_profile(p: QfiProfile) -> list[str]:
    where = f"flow.{p.name}"
    out: list[str] = []
    if p.packet_size <= 0:
        out.append(f"{where}.packet_size: must be > 0 (got {p.packet_size})")
    if p.arrival not in ARRIVAL_KINDS:
        out.append(f"{where}.arrival: must be one of {ARRIVAL_KINDS} (got {p.arrival!r})")
    if p.interval <= 0:
        out.append(f"{where}.interval: must be > 0 (got {p.interval})")
    if p.delay_bound is not None and p.delay_bound <= 0:
        out.append(f"{where}.delay_bound: must be > 0 when set (got {p.delay_bound})")
    if p.gbr is not None and p.gbr <= 0:
        out.append(f"{where}.gbr: must be > 0 when set (got {p.gbr})")
    if p.priority_level < 1:
        out.append(f"{where}.priority_level: must be >= 1 (got {p.priority_level})")
    for key in ("alpha", "beta", "gamma"):
        w = getattr(p, key)
        if not 0.0 <= w <= 1.0:
            out.append(f"{where}.{key}: must lie in [0, 1] (got {w})")
    if p.alpha + p.beta + p.gamma <= 0:
        out.append(f"{where}: alpha + beta + gamma must be > 0")
    if p.rate_cap is not None and p.rate_cap <= 0:
        out.append(f"{where}.rate_cap: must be > 0 when set (got {p.rate_cap})")
    if p.user_weight is not None and not 0.0 < p.user_weight <= 1.0:
        out.append(f"{where}.user_weight: must lie in (0, 1] (got {p.user_weight})")
    if p.arrival == "variable_video":
        if p.burst_min < 1:
            out.append(f"{where}.burst_min: must be >= 1 (got {p.burst_min})")
        if p.burst_max < p.burst_min:
            out.append(
                f"{where}.burst_max: must be >= burst_min "
                f"(got {p.burst_max} < {p.burst_min})"
            )
    if p.start_offset is not None and p.start_offset < 0:
        out.append(f"{where}.start_offset: must be >= 0 (got {p.start_offset})")
    return out


def validate_scenario(s: Scenario) -> list[str]:
    """Return every invariant violation of a scenario; an empty list means valid.

    Violations are reported as data, each prefixed with the offending key.
    """
    out: list[str] = []
    if s.num_ues < 1:
        out.append(f"num_ues: must be >= 1 (got {s.num_ues})")
    if s.sim_duration <= 0:
        out.append(f"sim_duration: must be > 0 (got {s.sim_duration})")
    if s.cell_capacity <= 0:
        out.append(f"cell_capacity: must be > 0 (got {s.cell_capacity})")
    if s.num_prbs < 1:
        out.append(f"num_prbs: must be >= 1 (got {s.num_prbs})")
    if s.tti_duration <= 0:
        out.append(f"tti_duration: must be > 0 (got {s.tti_duration})")
    if s.buffer_capacity < 1:
        out.append(f"buffer_capacity: must be >= 1 (got {s.buffer_capacity})")
    if s.gbr_window <= 0:
        out.append(f"gbr_window: must be > 0 (got {s.gbr_window})")
    if s.start_offset_policy not in START_OFFSET_POLICIES:
        out.append(
            f"start_offset_policy: must be one of {START_OFFSET_POLICIES} "
            f"(got {s.start_offset_policy!r})"
        )
    if s.channel_variation not in CHANNEL_VARIATIONS:
        out.append(
            f"channel_variation: must be one of {CHANNEL_VARIATIONS} "
            f"(got {s.channel_variation!r})"
        )
    if s.channel_multiplier_lo <= 0 or s.channel_multiplier_hi < s.channel_multiplier_lo:
        out.append(
            "channel_multiplier_lo/hi: need 0 < lo <= hi "
            f"(got {s.channel_multiplier_lo}, {s.channel_multiplier_hi})"
        )
    if s.channel_block_ttis < 1:
        out.append(f"channel_block_ttis: must be >= 1 (got {s.channel_block_ttis})")
    if (
        s.cell_capacity > 0
        and s.num_prbs >= 1
        and s.tti_duration > 0
        and s.base_efficiency * s.channel_multiplier_lo < 1
    ):
        out.append("cell_capacity: fewer than 1 bit per PRB per TTI at the lowest multiplier")

    if not s.flows_per_ue:
        out.append("flows_per_ue: at least one flow profile is required")
    names = [p.name for p in s.flows_per_ue]
    if len(set(names)) != len(names):
        out.append(f"flows_per_ue: role names must be unique (got {names})")
    qfis = [p.qfi for p in s.flows_per_ue]
    if len(set(qfis)) != len(qfis):
        out.append(f"flows_per_ue: QFI labels must be unique per UE (got {qfis})")
    for p in s.flows_per_ue:
        out.extend(_check_profile(p))
    return out


def require_valid(s: Scenario) -> Scenario:
    """Return the scenario unchanged, or raise ScenarioError listing its violations."""
    violations = validate_scenario(s)
    if violations:
        raise ScenarioError(violations)
    return s


# ---------------------------------------------------------------------------
# INI format
# ---------------------------------------------------------------------------
def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def _inner(raw: str) -> Any:
        if raw.strip().lower() in ("", "none"):
            return None
        return parse(raw)

    return _inner


_SCENARIO_KEYS: dict[str, Callable[[str], Any]] = {
    "num_ues": int,
    "sim_duration": float,
    "cell_capacity": float,
    "num_prbs": int,
    "seed": int,
    "start_offset_policy": str.strip,
    "tti_duration": float,
    "buffer_capacity": int,
    "gbr_window": float,
    "channel_variation": str.strip,
    "channel_multiplier_lo": float,
    "channel_multiplier_hi": float,
    "channel_block_ttis": int,
}

_PF_KEYS: dict[str, Callable[[str], Any]] = {
    "ema_window_ttis": int,
    "d_max_cap": float,
    "epsilon_time": float,
    "avg_throughput_floor": float,
}

_WEIGHT_KEYS: dict[str, Callable[[str], Any]] = {
    "alpha": float,
    "beta": float,
    "gamma": float,
}

_FLOW_KEYS: dict[str, Callable[[str], Any]] = {
    "qfi": int,
    "five_qi": int,
    "packet_size": int,
    "arrival": str.strip,
    "interval": float,
    "delay_bound": _optional(float),
    "gbr": _optional(float),
    "priority_level": int,
    "rate_cap": _optional(float),
    "user_weight": _optional(float),
    "burst_min": int,
    "burst_max": int,
    "start_offset": _optional(float),
    **_WEIGHT_KEYS,
}


def _csv_list(parse: Callable[[str], Any]) -> Callable[[str], tuple]:
    def _inner(raw: str) -> tuple:
        return tuple(parse(item.strip()) for item in raw.split(",") if item.strip())

    return _inner


_EXPERIMENT_KEYS: dict[str, Callable[[str], Any]] = {
    "runs": int,
    "base_seed": int,
    "schedulers": _csv_list(str),
    "ue_sweep": _csv_list(int),
    "output_dir": str.strip,
}


@dataclass
class ScenarioConfig:
    """Everything a configuration file can carry."""

    scenario: Scenario
    experiment: dict[str, Any] = field(default_factory=dict)
    weights: dict[str, tuple[float, float, float]] = field(default_factory=dict)


def _read_section(
    parser: configparser.ConfigParser,
    section: str,
    schema: dict[str, Callable[[str], Any]],
) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for key, raw in parser.items(section):
        if key not in schema:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        try:
            values[key] = schema[key](raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    return values


def parse_config(text: str) -> ScenarioConfig:
    """Parse configuration text into a scenario plus optional experiment settings.

    Raises:
        ConfigError: On syntax errors, unknown sections or keys, or bad values.
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc

    scenario_values: dict[str, Any] = {}
    pf_values: dict[str, Any] = {}
    default_weights: dict[str, Any] = {}
    flow_sections: list[tuple[str, dict[str, Any]]] = []
    experiment: dict[str, Any] = {}
    weights: dict[str, tuple[float, float, float]] = {}

    for section in parser.sections():
        if section == "scenario":
            scenario_values = _read_section(parser, section, _SCENARIO_KEYS)
        elif section == "scheduler":
            values = _read_section(parser, section, {**_PF_KEYS, **_WEIGHT_KEYS})
            default_weights = {k: values.pop(k) for k in list(values) if k in _WEIGHT_KEYS}
            pf_values = values
        elif section.startswith("flow."):
            name = section.removeprefix("flow.")
            if not name:
                raise ConfigError(f"[{section}] flow sections need a role name")
            flow_sections.append((name, _read_section(parser, section, _FLOW_KEYS)))
        elif section == "experiment":
            experiment = _read_section(parser, section, _EXPERIMENT_KEYS)
        elif section.startswith("weights."):
            name = section.removeprefix("weights.")
            values = _read_section(parser, section, _WEIGHT_KEYS)
            missing = set(_WEIGHT_KEYS) - set(values)
            if missing:
                raise ConfigError(f"[{section}] missing {sorted(missing)}")
            triple = (values["alpha"], values["beta"], values["gamma"])
            try:
                validate_weights(name, triple)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            weights[name] = triple
        else:
            raise ConfigError(f"unknown section [{section}]")

    profiles: list[QfiProfile] = []
    for name, values in flow_sections:
        merged = {**default_weights, **values}
        for required in ("qfi", "five_qi", "packet_size"):
            if required not in merged:
                raise ConfigError(f"[flow.{name}] missing required key {required!r}")
        profiles.append(build_profile(name, merged))

    try:
        pf_params = QosPfParams(**pf_values)
    except ValueError as exc:
        raise ConfigError(f"[scheduler] {exc}") from exc

    scenario = Scenario(flows_per_ue=tuple(profiles), pf_params=pf_params, **scenario_values)
    return ScenarioConfig(scenario=scenario, experiment=experiment, weights=weights)


def load_config(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    logger.info("Loaded configuration from %s", path)
    return parse_config(text)


def _format(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def scenario_to_ini(s: Scenario, experiment: Optional[dict[str, Any]] = None) -> str:
    """Render a scenario as configuration text; parse_config inverts it exactly."""
    sections: list[tuple[str, dict[str, str]]] = [
        ("scenario", {key: _format(getattr(s, key)) for key in _SCENARIO_KEYS}),
        ("scheduler", {key: _format(getattr(s.pf_params, key)) for key in _PF_KEYS}),
    ]
    for p in s.flows_per_ue:
        sections.append((
            f"flow.{p.name}",
            {f.name: _format(getattr(p, f.name)) for f in fields(p) if f.name != "name"},
        ))
    if experiment:
        sections.append(("experiment", {k: _format(v) for k, v in experiment.items()}))

    lines: list[str] = []
    for name, values in sections:
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in values.items())
        lines.append("")
    return "\n".join(lines)


def save_scenario(s: Scenario, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(scenario_to_ini(s))
    return path


def named_weights(config: Optional[ScenarioConfig] = None) -> dict[str, tuple[float, float, float]]:
    """Weight configurations from a config file, else the three defaults."""
    if config is not None and config.weights:
        return dict(config.weights)
    return dict(WEIGHT_CONFIGS)
