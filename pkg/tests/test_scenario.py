"""Tests for core types, scenario validation and the INI format."""

from dataclasses import replace
from pathlib import Path

import pytest

from src.config import WEIGHT_CONFIGS
from src.model import Packet, QosPfParams, TtiClock
from src.scenario import (
    ConfigError,
    ScenarioError,
    load_config,
    parse_config,
    reference_profiles,
    reference_scenario,
    require_valid,
    save_scenario,
    scenario_to_ini,
    validate_scenario,
    validate_weights,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class TestTtiClock:
    """Tests for the discrete TTI clock."""

    def test_advance_steps_by_one(self):
        clock = TtiClock(0, 0.001).advance().advance()
        assert clock.tti_index == 2
        assert clock.now == pytest.approx(0.002)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError, match="tti_index"):
            TtiClock(-1)

    def test_zero_duration_rejected(self):
        with pytest.raises(ValueError, match="tti_duration"):
            TtiClock(0, 0.0)


class TestCoreTypes:
    """Tests for packets, profiles and scheduler constants."""

    def test_packet_starts_with_full_size_remaining(self):
        p = Packet(flow_id=3, size=128, arrival_tti=5)
        assert p.remaining_bytes == 128
        assert not p.departed

    def test_offered_load_of_reference_profiles(self):
        control, sensor, video = reference_profiles()
        assert control.offered_load == pytest.approx(512e3)
        assert sensor.offered_load == pytest.approx(102.4e3)
        assert video.offered_load == pytest.approx(1000 * 8 * 22.5 * 30)

    def test_video_is_non_gbr(self):
        control, _, video = reference_profiles()
        assert control.is_gbr
        assert not video.is_gbr

    def test_pf_params_reject_zero_window(self):
        with pytest.raises(ValueError, match="ema_window_ttis"):
            QosPfParams(ema_window_ttis=0)

    def test_flow_ids_are_dense(self):
        s = reference_scenario()
        assert s.num_flows == 18
        assert s.flow_id(0, 0) == 0
        assert s.flow_id(5, 2) == 17


class TestValidateScenario:
    """Tests for scenario invariant checks."""

    def test_reference_scenario_is_valid(self):
        assert validate_scenario(reference_scenario()) == []

    def test_zero_ues_names_num_ues(self):
        violations = validate_scenario(reference_scenario(num_ues=0))
        assert violations == ["num_ues: must be >= 1 (got 0)"]

    def test_negative_gbr_names_the_flow(self):
        profiles = list(reference_profiles())
        profiles[1] = replace(profiles[1], gbr=-1.0)
        violations = validate_scenario(reference_scenario(flows_per_ue=tuple(profiles)))
        assert len(violations) == 1
        assert violations[0].startswith("flow.sensor.gbr")

    def test_all_zero_weights_rejected(self):
        s = reference_scenario().with_weights(0.0, 0.0, 0.0)
        violations = validate_scenario(s)
        assert any("alpha + beta + gamma" in v for v in violations)

    def test_duplicate_qfi_rejected(self):
        control, sensor, video = reference_profiles()
        s = reference_scenario(flows_per_ue=(control, replace(sensor, qfi=1), video))
        assert any("QFI" in v for v in validate_scenario(s))

    def test_require_valid_carries_every_violation(self):
        with pytest.raises(ScenarioError) as excinfo:
            require_valid(reference_scenario(num_ues=0, num_prbs=0))
        assert len(excinfo.value.violations) == 2


class TestValidateWeights:
    """Tests for named weight configurations."""

    def test_defaults_are_valid(self):
        for name, weights in WEIGHT_CONFIGS.items():
            validate_weights(name, weights)

    def test_zero_sum_rejected(self):
        with pytest.raises(ValueError, match="sum to 0"):
            validate_weights("off", (0.0, 0.0, 0.0))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            validate_weights("big", (1.5, 0.0, 0.0))


class TestIniFormat:
    """Tests for loading and dumping configuration files."""

    def test_reference_file_matches_reference_scenario(self):
        config = load_config(CONFIGS / "reference.ini")
        assert config.scenario == reference_scenario()
        assert config.weights == WEIGHT_CONFIGS
        assert config.experiment["runs"] == 20
        assert config.experiment["schedulers"] == ("qos-pf", "max-ci", "static-priority")
        assert config.experiment["ue_sweep"] == (5, 10, 20, 40)

    def test_shipped_configs_are_valid(self):
        for name in ("reference.ini", "high_load.ini", "factory_mix.ini"):
            assert validate_scenario(load_config(CONFIGS / name).scenario) == []

    def test_dump_then_load_is_identity(self):
        profiles = list(reference_profiles())
        profiles[0] = replace(profiles[0], start_offset=0.0002, rate_cap=1e6, user_weight=0.6)
        s = reference_scenario(
            num_ues=3,
            seed=7,
            sim_duration=0.25,
            channel_variation="block_fading",
            flows_per_ue=tuple(profiles),
        )
        assert parse_config(scenario_to_ini(s)).scenario == s

    def test_save_scenario_writes_loadable_file(self, tmp_path):
        path = save_scenario(reference_scenario(num_ues=2), tmp_path / "nested" / "s.ini")
        assert load_config(path).scenario.num_ues == 2

    def test_scheduler_weights_act_as_flow_defaults(self):
        text = (
            "[scheduler]\nalpha = 0.7\nbeta = 0.2\ngamma = 0.1\n"
            "[flow.control]\nqfi = 1\nfive_qi = 85\npacket_size = 64\n"
            "[flow.video]\nqfi = 3\nfive_qi = 9\npacket_size = 1000\nalpha = 0.1\n"
        )
        control, video = parse_config(text).scenario.flows_per_ue
        assert (control.alpha, control.beta, control.gamma) == (0.7, 0.2, 0.1)
        assert video.alpha == 0.1

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="num_uez"):
            parse_config("[scenario]\nnum_uez = 3\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="radio"):
            parse_config("[radio]\nnum_prbs = 3\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError, match="num_ues"):
            parse_config("[scenario]\nnum_ues = six\n")

    def test_flow_without_qfi_rejected(self):
        with pytest.raises(ConfigError, match="qfi"):
            parse_config("[flow.control]\nfive_qi = 85\npacket_size = 64\n")

    def test_none_clears_optional_fields(self):
        text = "[flow.bulk]\nqfi = 9\nfive_qi = 9\npacket_size = 100\ndelay_bound = none\ngbr =\n"
        (bulk,) = parse_config(text).scenario.flows_per_ue
        assert bulk.delay_bound is None
        assert bulk.gbr is None

    def test_missing_file_is_a_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.ini")
