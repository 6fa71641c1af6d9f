import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from gripsim.harness import (
    SimEngine,
    SimulationFault,
    TRACE_HEADER,
    record_to_csv_row,
    resolve_switch_streams,
    run_scenario,
    write_trace,
)
from gripsim.hbridge import DriveState
from gripsim.scenario import (
    IoFailure,
    MalformedScenario,
    Scenario,
    load_scenario,
    parse_scenario,
)
from gripsim.sensors import write_trace_csv

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

# Small fixed scenario frozen as a golden trace file.
GOLDEN_SCENARIO = {
    "name": "golden-pulse",
    "duration_ticks": 260,
    "events": [
        {"tick": 50, "switch": "close", "action": "press"},
        {"tick": 90, "switch": "close", "action": "release"},
        {"tick": 200, "switch": "open", "action": "press"},
    ],
}


def run_to_file(scenario, path):
    write_trace(run_scenario(scenario), path)
    return path.read_bytes()


class TestSwitchStreams:
    def test_fold_press_release(self):
        s = parse_scenario(
            {
                "duration_ticks": 10,
                "events": [
                    {"tick": 2, "switch": "open", "action": "press"},
                    {"tick": 5, "switch": "open", "action": "release"},
                    {"tick": 7, "switch": "close", "action": "press"},
                ],
            }
        )
        open_raw, close_raw = resolve_switch_streams(s)
        assert open_raw == [False, False, True, True, True, False, False, False, False, False]
        assert close_raw == [False] * 7 + [True, True, True]

    def test_same_tick_events_apply_in_order(self):
        s = parse_scenario(
            {
                "duration_ticks": 4,
                "events": [
                    {"tick": 1, "switch": "open", "action": "press"},
                    {"tick": 1, "switch": "open", "action": "release"},
                ],
            }
        )
        open_raw, _ = resolve_switch_streams(s)
        assert open_raw == [False, False, False, False]


class TestRunScenario:
    def test_no_stimulus_stays_idle(self):
        s = parse_scenario({"duration_ticks": 1000})
        records = list(run_scenario(s))
        assert len(records) == 1000
        theta0 = s.grip_params.theta_max
        for r in records:
            assert (r.rb0, r.rb1) == (0, 0)
            assert r.drive_state is DriveState.BRAKE  # (0,0) with enable tied high
            assert r.theta_out == theta0
            assert r.omega == 0.0
            assert r.applied_v == 0.0

    def test_ticks_are_sequential(self):
        s = parse_scenario({"duration_ticks": 50})
        assert [r.tick for r in run_scenario(s)] == list(range(50))

    def test_reference_close_scenario(self):
        s = load_scenario(SCENARIO_DIR / "reference_close.json")
        records = list(run_scenario(s))
        closed = [r for r in records if r.theta_out == s.grip_params.theta_min]
        assert closed, "arm never reached the closed stop"
        assert records[-1].theta_out == s.grip_params.theta_min
        assert records[-1].grip_force_n > 0
        # Once closed and still driven, the grip force stays on.
        first = closed[0].tick
        assert all(r.grip_force_n > 0 for r in records[first + 1 :])

    def test_reference_open_scenario(self):
        s = load_scenario(SCENARIO_DIR / "reference_open.json")
        records = list(run_scenario(s))
        assert min(r.theta_out for r in records) == s.grip_params.theta_min
        assert records[-1].theta_out == s.grip_params.theta_max

    def test_interlock_shows_brake_and_low_pins(self):
        s = parse_scenario(
            {
                "duration_ticks": 300,
                "events": [
                    {"tick": 0, "switch": "close", "action": "press"},
                    {"tick": 100, "switch": "open", "action": "press"},
                ],
            }
        )
        records = list(run_scenario(s))
        # The very tick the second press debounces, the interlock drops the
        # outputs to (0,0); they stay there while both switches are held.
        interlock_tick = 100 + s.firmware_cfg.debounce_ticks - 1
        assert (records[interlock_tick - 1].rb0, records[interlock_tick - 1].rb1) == (0, 1)
        tail = records[interlock_tick:]
        assert all((r.rb0, r.rb1) == (0, 0) for r in tail)
        assert all(r.drive_state is DriveState.BRAKE for r in tail)

    def test_simulation_fault_carries_tick(self):
        # A near-zero rotor inertia overflows omega on the first driven tick.
        s = parse_scenario(
            {
                "duration_ticks": 100,
                "motor_params": {"j": 1e-313},
                "events": [{"tick": 0, "switch": "close", "action": "press"}],
            }
        )
        with pytest.raises(SimulationFault) as err:
            list(run_scenario(s))
        # The fault lands on the first tick the bridge actually drives,
        # right after the press debounces.
        assert err.value.tick == s.firmware_cfg.debounce_ticks - 1
        assert f"tick {err.value.tick}" in str(err.value)


class TestDeterminism:
    def test_byte_identical_runs(self, tmp_path):
        s = load_scenario(SCENARIO_DIR / "reference_close.json")
        a = run_to_file(s, tmp_path / "a.csv")
        b = run_to_file(s, tmp_path / "b.csv")
        assert hashlib.sha256(a).hexdigest() == hashlib.sha256(b).hexdigest()

    def test_loading_twice_gives_equal_scenarios(self):
        a = load_scenario(SCENARIO_DIR / "reference_close.json")
        b = load_scenario(SCENARIO_DIR / "reference_close.json")
        assert a == b


class TestTraceFormat:
    def test_header_is_exact(self, tmp_path):
        s = parse_scenario({"duration_ticks": 3})
        path = tmp_path / "t.csv"
        write_trace(run_scenario(s), path)
        first = path.read_text().splitlines()[0]
        assert first == (
            "tick,open_sw,close_sw,ra3,ra4,rb0,rb1,drive_state,"
            "applied_v,current_a,omega,theta_out,grip_force_n"
        )
        assert first == TRACE_HEADER

    def test_drive_state_spelling(self, tmp_path):
        s = load_scenario(SCENARIO_DIR / "reference_close.json")
        path = tmp_path / "t.csv"
        write_trace(run_scenario(s), path)
        text = path.read_text()
        assert "Reverse" in text and "Brake" in text
        for token in ("REVERSE", "reverse", "DriveState"):
            assert token not in text

    def test_float_formatting_nine_significant_digits(self):
        from gripsim.harness import TraceRecord

        rec = TraceRecord(
            0, 0, 1, 0, 1, 0, 1, DriveState.REVERSE,
            -6.0, -2.123456789123, 123.456789123, 0.987654321987, 0.0,
        )
        row = record_to_csv_row(rec)
        assert row == "0,0,1,0,1,0,1,Reverse,-6,-2.12345679,123.456789,0.987654322,0"

    def test_golden_trace(self, tmp_path):
        s = parse_scenario(GOLDEN_SCENARIO)
        path = tmp_path / "golden.csv"
        write_trace(run_scenario(s), path)
        golden = (GOLDEN_DIR / "golden_pulse.csv").read_bytes()
        assert path.read_bytes() == golden

    def test_write_failure_is_io_failure(self, tmp_path):
        s = parse_scenario({"duration_ticks": 3})
        with pytest.raises(IoFailure):
            write_trace(run_scenario(s), tmp_path / "no_such_dir" / "t.csv")


class TestPressureSource:
    def make_pressure_scenario(self, tmp_path, samples, rate=1000.0, duration=None):
        write_trace_csv(tmp_path / "close.csv", samples, rate, "kPa")
        data = {
            "duration_ticks": duration or len(samples),
            "sensor_source": {
                "type": "pressure_traces",
                "close": {
                    "file": "close.csv",
                    "threshold_on_kpa": 40.0,
                    "threshold_off_kpa": 25.0,
                },
            },
        }
        path = tmp_path / "scn.json"
        path.write_text(json.dumps(data))
        return load_scenario(path)

    def test_ramp_drives_close_switch(self, tmp_path):
        ramp = np.linspace(0.0, 80.0, 400)
        s = self.make_pressure_scenario(tmp_path, ramp)
        _, close_raw = resolve_switch_streams(s)
        k = next(i for i, v in enumerate(ramp) if v >= 40.0)
        assert close_raw == [False] * k + [True] * (400 - k)

    def test_short_trace_holds_final_state(self, tmp_path):
        s = self.make_pressure_scenario(tmp_path, [0.0, 50.0, 30.0], duration=10)
        _, close_raw = resolve_switch_streams(s)
        assert close_raw == [False] + [True] * 9

    def test_rate_mismatch_rejected(self, tmp_path):
        s = self.make_pressure_scenario(tmp_path, [0.0, 50.0], rate=500.0, duration=5)
        with pytest.raises(MalformedScenario) as err:
            resolve_switch_streams(s)
        assert "sample_rate" in str(err.value)

    def test_missing_trace_file(self, tmp_path):
        data = {
            "duration_ticks": 5,
            "sensor_source": {
                "type": "pressure_traces",
                "open": {"file": "ghost.csv", "threshold_on_kpa": 2, "threshold_off_kpa": 1},
            },
        }
        path = tmp_path / "scn.json"
        path.write_text(json.dumps(data))
        with pytest.raises(IoFailure):
            resolve_switch_streams(load_scenario(path))

    def test_pressure_scenario_closes_the_arm(self, tmp_path):
        n = 1200
        pressure = np.concatenate([np.zeros(100), np.full(n - 100, 60.0)])
        s = self.make_pressure_scenario(tmp_path, pressure)
        records = list(run_scenario(s))
        assert records[-1].theta_out == s.grip_params.theta_min
        assert records[-1].grip_force_n > 0

    def test_shipped_grasp_example(self):
        # One noisy squeeze-and-release: the hand closes during the hold and
        # stays closed (unpowered) after the muscle relaxes.
        s = load_scenario(SCENARIO_DIR / "pressure_close.json")
        records = list(run_scenario(s))
        closed = [r.tick for r in records if r.theta_out == s.grip_params.theta_min]
        assert closed and closed[0] < 800
        assert records[-1].theta_out == s.grip_params.theta_min
        assert records[-1].grip_force_n == 0.0  # drive released, hand parked


class TestEmgRmsSource:
    def test_stressed_trace_trips_the_switch(self):
        s = parse_scenario(
            {
                "duration_ticks": 2000,
                "sensor_source": {
                    "type": "emg_rms",
                    "switch": "close",
                    "position": "S1",
                    "condition": "Stressed",  # envelope 30 uV
                    "window_samples": 64,
                    "threshold_on_uv": 20.0,
                    "threshold_off_uv": 10.0,
                },
                "emg_profile": {"duration_s": 2.0, "sample_rate_hz": 1000},
            }
        )
        open_raw, close_raw = resolve_switch_streams(s)
        assert not any(open_raw)
        # A 30 uV RMS stream sits far above the 20 uV on threshold.
        assert sum(close_raw) > 1800

    def test_rate_mismatch_rejected(self):
        s = parse_scenario(
            {
                "duration_ticks": 100,
                "tick_period_us": 500,
                "sensor_source": {"type": "emg_rms"},
                "emg_profile": {"duration_s": 1.0, "sample_rate_hz": 1000},
            }
        )
        with pytest.raises(MalformedScenario):
            resolve_switch_streams(s)

    def test_deterministic(self):
        data = {
            "duration_ticks": 500,
            "sensor_source": {"type": "emg_rms", "condition": "Stressed"},
            "emg_profile": {"duration_s": 0.5},
        }
        a = resolve_switch_streams(parse_scenario(data))
        b = resolve_switch_streams(parse_scenario(data))
        assert a == b


class TestEngine:
    def test_engine_starts_open_at_rest(self):
        eng = SimEngine()
        assert eng.plant_state.theta_out == eng.grip_params.theta_max
        assert eng.tick == 0

    def test_engine_step_advances_tick(self):
        eng = SimEngine()
        r0 = eng.step(False, False)
        r1 = eng.step(False, False)
        assert (r0.tick, r1.tick) == (0, 1)

    def test_initial_theta_clamped_into_bounds(self):
        eng = SimEngine(initial_theta=99.0)
        assert eng.plant_state.theta_out == eng.grip_params.theta_max
