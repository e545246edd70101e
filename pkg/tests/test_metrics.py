"""Tests for KPI computation and Monte Carlo aggregation."""

import numpy as np
import pandas as pd
import pytest

from src.metrics.kpi import (
    FlowTrace,
    deadline_misses,
    fair_shares,
    gbr_satisfaction,
    jain_index,
    jain_index_fair,
    packet_delay,
    violation_ratio,
)
from src.metrics.report import (
    FLOW_COLUMNS,
    RunReport,
    aggregate_runs,
    class_rows,
    confidence_half_width,
    flow_row,
    read_csv,
    summary_table,
    write_aggregate,
)
from src.model import Packet


def _trace(delays=(), arrivals=None, drops=0, bound=0.005, gbr=None, served=()):
    delays = np.asarray(delays, dtype=float)
    return FlowTrace(
        flow_id=0,
        ue_id=0,
        role="control",
        label="ue0/control",
        qfi=1,
        tti_duration=0.001,
        delay_bound=bound,
        gbr=gbr,
        offered_load=512e3,
        arrivals=len(delays) + drops if arrivals is None else arrivals,
        departures=len(delays),
        drops=drops,
        delays=delays,
        served_bits=np.asarray(served, dtype=np.int64),
    )


def _report(seed, value, scheduler="qos-pf"):
    classes = pd.DataFrame([{
        "class": "control",
        "mean_delay": value,
        "p95_delay": value,
        "violation_ratio": 0.0,
        "gbr_satisfaction": 1.0,
        "throughput": value,
        "drops": 0,
    }])
    return RunReport(
        scheduler=scheduler,
        seed=seed,
        config="",
        num_ttis=10,
        sched_calls=10,
        flows=pd.DataFrame(columns=FLOW_COLUMNS),
        classes=classes,
        jain_index=1.0,
        jain_index_fair=1.0,
        total_throughput=value,
        runtimes=np.full(10, 1e-5),
    )


class TestPacketDelay:
    """Tests for per-packet delay."""

    def test_same_tti_service(self):
        p = Packet(0, 64, 10)
        p.departure_tti = 10
        assert packet_delay(p, 0.001) == pytest.approx(0.001)

    def test_four_ttis_later(self):
        p = Packet(0, 64, 10)
        p.departure_tti = 14
        assert packet_delay(p, 0.001) == pytest.approx(0.005)

    def test_pending_packet_rejected(self):
        with pytest.raises(ValueError, match="still pending"):
            packet_delay(Packet(0, 64, 10), 0.001)


class TestViolationRatio:
    """Tests for the deadline violation ratio."""

    def test_all_on_time(self):
        assert violation_ratio(_trace([0.001] * 20)) == 0.0

    def test_one_late_in_fifty(self):
        assert violation_ratio(_trace([0.001] * 49 + [0.006])) == pytest.approx(0.02)

    def test_delay_equal_to_bound_is_on_time(self):
        assert violation_ratio(_trace([0.005] * 10)) == 0.0

    def test_drops_count_as_violations(self):
        assert violation_ratio(_trace([0.001] * 8, drops=2)) == pytest.approx(0.2)

    def test_no_bound_is_undefined(self):
        assert violation_ratio(_trace([0.001], bound=None)) is None

    def test_non_increasing_in_bound(self):
        rng = np.random.default_rng(7)
        trace = _trace(rng.uniform(0.001, 0.02, size=200), drops=3)
        ratios = [violation_ratio(trace, b) for b in np.linspace(0.001, 0.03, 30)]
        assert all(a >= b for a, b in zip(ratios, ratios[1:]))


class TestDeadlineMisses:
    """Tests for late-plus-dropped packet counts."""

    def test_counts_late_and_dropped(self):
        assert deadline_misses(_trace([0.001] * 7 + [0.006, 0.009], drops=3)) == 5

    def test_no_bound_rejected(self):
        with pytest.raises(ValueError, match="no delay bound"):
            deadline_misses(_trace([0.001], bound=None))

    def test_class_ratio_pools_packet_counts(self):
        traces = [
            _trace([0.001, 0.001, 0.006]),
            _trace([0.001] * 6, drops=1),
        ]
        flows = pd.DataFrame([flow_row(t, 0.1) for t in traces], columns=FLOW_COLUMNS)
        classes = class_rows(traces, flows)
        assert classes.loc[0, "violation_ratio"] == 2 / 10
        assert classes.loc[0, "drops"] == 1


class TestGbrSatisfaction:
    """Tests for the windowed GBR satisfaction ratio."""

    def test_always_met(self):
        trace = _trace(gbr=64e3, served=[100] * 400)
        assert gbr_satisfaction(trace, 0.1) == 1.0

    def test_never_served(self):
        trace = _trace(gbr=64e3, served=[0] * 400)
        assert gbr_satisfaction(trace, 0.1) == 0.0

    def test_alternating_windows(self):
        served = ([100] * 100 + [0] * 100) * 2
        assert gbr_satisfaction(_trace(gbr=64e3, served=served), 0.1) == 0.5

    def test_partial_window_ignored(self):
        served = [100] * 100 + [0] * 50
        assert gbr_satisfaction(_trace(gbr=64e3, served=served), 0.1) == 1.0

    def test_non_gbr_is_undefined(self):
        assert gbr_satisfaction(_trace(served=[100] * 100), 0.1) is None


class TestJainIndex:
    """Tests for Jain's fairness index."""

    def test_equal_shares(self):
        assert jain_index([5, 5, 5, 5]) == 1.0

    def test_monopoly(self):
        assert jain_index([10, 0, 0, 0]) == 0.25

    def test_hand_value(self):
        assert jain_index([2.1, 7.9]) == pytest.approx(0.7483, abs=1e-4)

    def test_all_zero_undefined(self):
        assert jain_index([0, 0, 0]) is None

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            jain_index([1.0, -1.0])

    def test_scale_invariance_and_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            x = rng.exponential(1e6, size=int(rng.integers(1, 40)))
            c = float(rng.uniform(1e-3, 1e3))
            j = jain_index(x)
            assert jain_index(c * x) == pytest.approx(j, abs=1e-12)
            assert 1 / len(x) - 1e-12 <= j <= 1 + 1e-12

    def test_fair_shares_water_fill(self):
        assert fair_shares([1, 10, 10], 9).tolist() == [1, 4, 4]

    def test_fair_index_of_fair_allocation_is_one(self):
        demands = [512e3, 102.4e3, 5.4e6, 5.4e6]
        shares = fair_shares(demands, 6e6)
        assert jain_index_fair(shares, demands) == pytest.approx(1.0)

    def test_fair_index_penalises_starvation(self):
        demands = [1e6, 1e6, 1e6]
        assert jain_index_fair([1.5e6, 1.5e6, 0.0], demands) < 0.7


class TestAggregation:
    """Tests for mean and Student-t confidence intervals across runs."""

    def test_identical_runs_zero_width(self):
        agg = aggregate_runs([_report(s, 4.0) for s in range(5)])
        assert agg.value("qos-pf", "control", "throughput") == 4.0
        assert agg.ci("qos-pf", "control", "throughput") == 0.0

    def test_two_runs_t_quantile(self):
        agg = aggregate_runs([_report(1, 1.0), _report(2, 3.0)])
        assert agg.value("qos-pf", "control", "throughput") == pytest.approx(2.0)
        assert agg.ci("qos-pf", "control", "throughput") == pytest.approx(12.706, abs=1e-3)

    def test_twenty_runs_df_19(self):
        assert confidence_half_width(1.0, 20) == pytest.approx(2.093 / np.sqrt(20), rel=1e-3)

    def test_single_run_has_no_ci(self):
        agg = aggregate_runs([_report(1, 2.0)])
        assert agg.value("qos-pf", "control", "throughput") == 2.0
        assert agg.kpis["ci95"].isna().all()

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_runs([])

    def test_order_insensitive(self):
        reports = [_report(s, float(s * s)) for s in range(6)]
        a = aggregate_runs(reports)
        b = aggregate_runs(list(reversed(reports)))
        pd.testing.assert_frame_equal(a.kpis, b.kpis)

    def test_cell_rows_carry_jain(self):
        agg = aggregate_runs([_report(1, 2.0), _report(2, 2.0)])
        assert agg.value("qos-pf", "all", "jain_index_fair") == 1.0

    def test_runtime_kept_separate(self):
        agg = aggregate_runs([_report(1, 2.0), _report(2, 2.0)])
        assert "runtime_mean" not in set(agg.kpis["kpi"])
        assert set(agg.runtime["kpi"]) == {"runtime_mean", "runtime_p99"}

    def test_csv_marks_missing_as_na(self, tmp_path):
        agg = aggregate_runs([_report(1, 2.0)])
        kpi_path, runtime_path = write_aggregate(agg, tmp_path)
        assert "n/a" in kpi_path.read_text()
        assert runtime_path.exists()
        assert read_csv(kpi_path)["ci95"].isna().all()

    def test_summary_table_formats_cells(self):
        agg = aggregate_runs([_report(1, 1.0), _report(2, 3.0)])
        table = summary_table(agg.kpis)
        assert table.loc[("qos-pf", "", "control"), "throughput"].startswith("2 ±")
