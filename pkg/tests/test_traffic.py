"""Tests for arrival processes and per-flow FIFO queues."""

from dataclasses import replace

import pytest

from src.model import FlowState, Packet, TtiClock
from src.scenario import reference_profiles, reference_scenario
from src.traffic.generator import (
    ArrivalProcess,
    arrivals_at,
    build_processes,
    dump_arrival_trace,
    enqueue,
    serve,
)


@pytest.fixture
def profiles():
    control, sensor, video = reference_profiles()
    return {"control": control, "sensor": sensor, "video": video}


def _flow(profile, capacity=500):
    return FlowState(flow_id=0, ue_id=0, profile=profile, buffer_capacity=capacity)


class TestArrivals:
    """Tests for periodic and video arrival processes."""

    def test_control_packet_every_tti(self, profiles):
        proc = ArrivalProcess.for_flow(0, profiles["control"], seed=1, policy="zero")
        pkts = arrivals_at(proc, TtiClock(7))
        assert len(pkts) == 1
        assert pkts[0].size == 64
        assert pkts[0].arrival_tti == 7

    def test_sensor_silent_between_periods(self, profiles):
        proc = ArrivalProcess.for_flow(1, profiles["sensor"], seed=1, policy="zero")
        assert arrivals_at(proc, TtiClock(7)) == []
        assert len(arrivals_at(proc, TtiClock(10))) == 1

    def test_control_over_1000_ttis(self, profiles):
        proc = ArrivalProcess.for_flow(0, profiles["control"], seed=1, policy="zero")
        pkts = [p for t in range(1000) for p in arrivals_at(proc, TtiClock(t))]
        assert len(pkts) == 1000
        assert sum(p.size * 8 for p in pkts) == 512_000

    def test_sensor_offset_lands_in_containing_tti(self, profiles):
        sensor = replace(profiles["sensor"], start_offset=0.0075)
        proc = ArrivalProcess.for_flow(1, sensor, seed=1)
        hits = [t for t in range(40) if arrivals_at(proc, TtiClock(t))]
        assert hits == [7, 17, 27, 37]

    def test_video_bursts_within_range(self, profiles):
        proc = ArrivalProcess.for_flow(2, profiles["video"], seed=4, policy="zero")
        per_tti = [len(arrivals_at(proc, TtiClock(t))) for t in range(1000)]
        bursts = [n for n in per_tti if n]
        assert len(bursts) == 30
        assert all(5 <= n <= 40 for n in bursts)

    def test_arrivals_are_deterministic(self, profiles):
        a = ArrivalProcess.for_flow(2, profiles["video"], seed=9)
        b = ArrivalProcess.for_flow(2, profiles["video"], seed=9)
        assert a == b
        for t in range(200):
            assert len(arrivals_at(a, TtiClock(t))) == len(arrivals_at(b, TtiClock(t)))

    def test_uniform_offset_within_one_period(self, profiles):
        for seed in range(20):
            proc = ArrivalProcess.for_flow(1, profiles["sensor"], seed=seed)
            assert 0.0 <= proc.start_offset < profiles["sensor"].interval

    def test_offset_beyond_horizon_is_silent(self, profiles):
        late = replace(profiles["control"], start_offset=5.0)
        proc = ArrivalProcess.for_flow(0, late, seed=1)
        assert all(not arrivals_at(proc, TtiClock(t)) for t in range(1000))

    def test_bad_period_rejected(self):
        with pytest.raises(ValueError, match="period"):
            ArrivalProcess(flow_id=0, kind="periodic", packet_size=64, period=0.0)

    def test_build_processes_in_flow_order(self):
        procs = build_processes(reference_scenario(num_ues=2))
        assert [p.flow_id for p in procs] == list(range(6))
        assert [p.kind for p in procs[:3]] == ["periodic", "periodic", "variable_video"]

    def test_dump_arrival_trace(self, tmp_path, profiles):
        proc = ArrivalProcess.for_flow(0, profiles["control"], seed=1, policy="zero")
        path = dump_arrival_trace([proc], 50, tmp_path / "arrivals.csv", 0.001)
        lines = path.read_text().splitlines()
        assert lines[0] == "tti,flow_id,packet_size"
        assert len(lines) == 51


class TestQueue:
    """Tests for enqueue and FIFO service."""

    def test_enqueue_into_empty_queue(self, profiles):
        flow = _flow(profiles["control"])
        enqueue(flow, [Packet(0, 64, 0) for _ in range(3)])
        assert len(flow.queue) == 3
        assert flow.queued_bytes == 192
        assert flow.drops == 0

    def test_full_queue_tail_drops(self, profiles):
        flow = _flow(profiles["control"])
        enqueue(flow, [Packet(0, 64, 0) for _ in range(500)])
        enqueue(flow, [Packet(0, 64, 1)])
        assert len(flow.queue) == 500
        assert flow.drops == 1
        assert flow.arrivals == 501
        assert flow.queue[-1].arrival_tti == 0

    def test_interleaved_enqueue_preserves_order(self, profiles):
        flow = _flow(profiles["sensor"])
        order = []
        for t in range(6):
            batch = [Packet(0, 10 + t, t) for _ in range(t % 3 + 1)]
            order.extend(p.size for p in batch)
            enqueue(flow, batch)
        departed = serve(flow, flow.queued_bytes, tti=10)
        assert [p.size for p in departed] == order

    def test_partial_service_keeps_head(self, profiles):
        flow = _flow(profiles["control"])
        enqueue(flow, [Packet(0, 64, 0), Packet(0, 64, 0)])
        departed = serve(flow, 100, tti=0)
        assert len(departed) == 1
        assert departed[0].departure_tti == 0
        assert flow.queue[0].remaining_bytes == 28
        assert flow.queued_bytes == 28
        assert flow.cumulative_bits_served == 800
        assert flow.bytes_served_this_tti == 100

    def test_service_capped_at_backlog(self, profiles):
        flow = _flow(profiles["control"])
        enqueue(flow, [Packet(0, 64, 3)])
        departed = serve(flow, 1000, tti=4)
        assert flow.bytes_served_this_tti == 64
        assert departed[0].departure_tti == 4
        assert flow.departures == 1
        assert not flow.queue
