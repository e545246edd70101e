"""Tests for the abstract per-UE channel and PRB grids."""

import pytest

from src.channel.model import (
    ChannelModel,
    bits_per_prb,
    dump_channel_realization,
    grid_for_tti,
)
from src.scenario import reference_scenario


def _model(**overrides) -> ChannelModel:
    return ChannelModel.from_scenario(reference_scenario(**overrides))


class TestBitsPerPrb:
    """Tests for per-UE PRB capacity."""

    def test_flat_channel_gives_800_bits(self):
        m = _model(channel_variation="none")
        assert {bits_per_prb(m, ue, t) for ue in range(6) for t in range(0, 1000, 37)} == {800}

    def test_unit_multipliers_equal_base_efficiency(self):
        m = _model(channel_multiplier_lo=1.0, channel_multiplier_hi=1.0)
        assert all(bits_per_prb(m, ue, 0) == 800 for ue in range(6))

    def test_static_spread_runs_from_hi_to_lo(self):
        m = _model()
        values = [bits_per_prb(m, ue, 0) for ue in range(6)]
        assert values[0] == 800
        assert values[-1] == 480
        assert values == sorted(values, reverse=True)

    def test_full_grid_carries_cell_capacity(self):
        s = reference_scenario(channel_variation="none")
        m = ChannelModel.from_scenario(s)
        per_second = s.num_prbs * bits_per_prb(m, 0, 0) / s.tti_duration
        assert per_second == pytest.approx(s.cell_capacity)

    def test_block_fading_constant_within_block(self):
        m = _model(channel_variation="block_fading", channel_block_ttis=50)
        for ue in range(6):
            for block in range(4):
                values = {bits_per_prb(m, ue, t) for t in range(block * 50, (block + 1) * 50)}
                assert len(values) == 1
                assert 480 <= values.pop() <= 800

    def test_block_fading_depends_on_seed_only(self):
        a = _model(channel_variation="block_fading", seed=3)
        b = _model(channel_variation="block_fading", seed=3)
        assert [bits_per_prb(a, 2, t) for t in range(0, 2000, 100)] == [
            bits_per_prb(b, 2, t) for t in range(0, 2000, 100)
        ]

    def test_unknown_ue_rejected(self):
        with pytest.raises(ValueError, match="unknown UE 6"):
            bits_per_prb(_model(), 6, 0)


class TestGrid:
    """Tests for per-TTI resource grids."""

    def test_fresh_grid_is_unassigned(self):
        grid = grid_for_tti(_model(), 0)
        assert grid.num_prbs == 25
        assert grid.unassigned() == 25

    def test_full_assignment_leaves_nothing(self):
        grid = grid_for_tti(_model(), 0)
        assert list(grid.assign(4, 10)) == list(range(10))
        grid.assign(7, 15)
        assert grid.unassigned() == 0
        assert grid.owners.count(4) == 10

    def test_over_assignment_rejected(self):
        grid = grid_for_tti(_model(), 0)
        with pytest.raises(ValueError, match="cannot assign"):
            grid.assign(0, 26)

    def test_nominal_grantable_bits(self):
        assert grid_for_tti(_model(), 0).total_nominal_bits() == 20_000

    def test_grid_rejects_unknown_ue(self):
        with pytest.raises(ValueError, match="not registered"):
            grid_for_tti(_model(), 0).ue_bits_per_prb(99)

    def test_dump_channel_realization(self, tmp_path):
        path = dump_channel_realization(_model(num_ues=2), 10, tmp_path / "channel.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "tti,ue_id,bits_per_prb"
        assert len(lines) == 21
