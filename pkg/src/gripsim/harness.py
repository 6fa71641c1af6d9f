"""Fixed-step scheduler wiring sensors -> firmware -> bridge -> plant.

Each tick runs the chain once, in that order: the raw switch levels for the
tick go through the controller, the controller's output pins map to bridge
input voltages (logic 1 drives the full supply rail, enable tied high), the
bridge resolves a drive state, and the plant integrates one tick under it.
The TraceRecord for tick t therefore shows the plant state after the dt
step driven by tick t's inputs.

Runs are deterministic: the same scenario always produces byte-identical
trace CSV output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .firmware import FirmwareConfig, FirmwareState
from .hbridge import DriveState, drive_logic
from .plant import GripParams, MotorParams, NonFiniteState, PlantState
from .scenario import (
    DirectSwitches,
    EmgRmsSource,
    IoFailure,
    MalformedScenario,
    PressureTraces,
    Scenario,
)
from . import sensors


class SimulationFault(Exception):
    """A module error during a run, annotated with the failing tick."""

    def __init__(self, tick: int, cause: Exception) -> None:
        self.tick = tick
        self.cause = cause
        super().__init__(f"simulation fault at tick {tick}: {cause}")


class TraceRecord(NamedTuple):
    tick: int
    open_sw: int
    close_sw: int
    ra3: int
    ra4: int
    rb0: int
    rb1: int
    drive_state: DriveState
    applied_v: float
    current_a: float
    omega: float
    theta_out: float
    grip_force_n: float


TRACE_HEADER = (
    "tick,open_sw,close_sw,ra3,ra4,rb0,rb1,drive_state,"
    "applied_v,current_a,omega,theta_out,grip_force_n"
)


class SimEngine:
    """Live simulation core stepped one firmware tick at a time.

    The arm rests open (aperture at theta_max) unless told otherwise.
    """

    def __init__(
        self,
        firmware_cfg: FirmwareConfig | None = None,
        motor_params: MotorParams | None = None,
        grip_params: GripParams | None = None,
        initial_theta: float | None = None,
    ) -> None:
        self.firmware_cfg = firmware_cfg or FirmwareConfig()
        self.motor_params = motor_params or MotorParams()
        self.grip_params = grip_params or GripParams()
        gp = self.grip_params
        theta0 = gp.theta_max if initial_theta is None else initial_theta
        theta0 = min(max(theta0, gp.theta_min), gp.theta_max)
        self.fw_state = FirmwareState()
        self.plant_state = PlantState(theta_out=theta0)
        self.tick = 0
        self.dt = self.firmware_cfg.tick_period_us * 1e-6

    @property
    def motor_params(self) -> MotorParams:
        return self._motor_params

    @motor_params.setter
    def motor_params(self, mp: MotorParams) -> None:
        self._motor_params = mp
        # Pin pair -> (drive state, applied volts), indexed by rb0*2 + rb1.
        # Built through the bridge truth table so there is one source of it.
        self._drive_lut = tuple(
            drive_logic(rb0, rb1, True, mp.supply_v) for rb0, rb1 in
            ((0, 0), (0, 1), (1, 0), (1, 1))
        )

    def step(self, open_pressed: bool, close_pressed: bool) -> TraceRecord:
        """Advance one tick and return its trace record."""
        rb0, rb1 = self.fw_state.advance(open_pressed, close_pressed, self.firmware_cfg)
        dstate, applied_v = self._drive_lut[rb0 * 2 + rb1]
        plant = self.plant_state
        plant.advance(dstate, applied_v, self._motor_params, self.grip_params, self.dt)
        o = 1 if open_pressed else 0
        c = 1 if close_pressed else 0
        rec = TraceRecord(
            self.tick,
            o,
            c,
            o,
            c,
            rb0,
            rb1,
            dstate,
            applied_v,
            plant.current_a,
            plant.omega,
            plant.theta_out,
            plant.grip_force_n,
        )
        self.tick += 1
        return rec


def _streams_from_events(scenario: Scenario) -> tuple[list[bool], list[bool]]:
    n = scenario.duration_ticks
    out = {"open": [False] * n, "close": [False] * n}
    level = {"open": False, "close": False}
    cursor = {"open": 0, "close": 0}
    for ev in scenario.events:
        stream = out[ev.switch]
        cur = cursor[ev.switch]
        if ev.tick > cur and level[ev.switch]:
            stream[cur : ev.tick] = [True] * (ev.tick - cur)
        cursor[ev.switch] = ev.tick
        level[ev.switch] = ev.action == "press"
    for name in ("open", "close"):
        if level[name]:
            out[name][cursor[name] : n] = [True] * (n - cursor[name])
    return out["open"], out["close"]


def _pad_stream(stream: list[bool], n: int) -> list[bool]:
    # Hold the comparator's final state once the trace runs out.
    if len(stream) >= n:
        return stream[:n]
    tail = stream[-1] if stream else False
    return stream + [tail] * (n - len(stream))


def _streams_from_pressure(scenario: Scenario, src: PressureTraces) -> tuple[list[bool], list[bool]]:
    n = scenario.duration_ticks
    streams = {"open": [False] * n, "close": [False] * n}
    for name, channel in (("open", src.open), ("close", src.close)):
        if channel is None:
            continue
        try:
            trace = sensors.read_pressure_trace(channel.file)
        except OSError as exc:
            raise IoFailure(f"cannot read pressure trace {channel.file}: {exc}") from exc
        except ValueError as exc:
            raise MalformedScenario(f"sensor_source.{name}.file", str(exc)) from exc
        if abs(trace.sample_rate_hz - scenario.tick_rate_hz) > 1e-6:
            raise MalformedScenario(
                f"sensor_source.{name}.file",
                f"sample_rate_hz={trace.sample_rate_hz:g} does not match the "
                f"tick rate {scenario.tick_rate_hz:g} Hz",
            )
        switched = sensors.strain_to_switch(trace, channel.threshold_on_kpa, channel.threshold_off_kpa)
        streams[name] = _pad_stream(switched, n)
    return streams["open"], streams["close"]


def _streams_from_emg(scenario: Scenario, src: EmgRmsSource) -> tuple[list[bool], list[bool]]:
    profile = scenario.emg_profile or sensors.EmgProfile()
    if abs(profile.sample_rate_hz - scenario.tick_rate_hz) > 1e-6:
        raise MalformedScenario(
            "emg_profile.sample_rate_hz",
            f"{profile.sample_rate_hz:g} does not match the tick rate "
            f"{scenario.tick_rate_hz:g} Hz",
        )
    trace = sensors.synthesize_emg(profile, src.position, src.condition)
    switched = sensors.rms_to_switch(
        trace.samples, src.window_samples, src.threshold_on_uv, src.threshold_off_uv
    )
    n = scenario.duration_ticks
    stream = _pad_stream(switched, n)
    silent = [False] * n
    if src.switch == "open":
        return stream, silent
    return silent, stream


def resolve_switch_streams(scenario: Scenario) -> tuple[list[bool], list[bool]]:
    """Per-tick raw (open, close) switch levels for the whole scenario."""
    src = scenario.sensor_source
    if isinstance(src, DirectSwitches):
        return _streams_from_events(scenario)
    if isinstance(src, PressureTraces):
        return _streams_from_pressure(scenario, src)
    if isinstance(src, EmgRmsSource):
        return _streams_from_emg(scenario, src)
    raise MalformedScenario("sensor_source", f"unsupported sensor source {src!r}")


def run_scenario(scenario: Scenario) -> Iterator[TraceRecord]:
    """Run a scenario tick by tick, yielding one TraceRecord per tick."""
    open_raw, close_raw = resolve_switch_streams(scenario)
    engine = SimEngine(scenario.firmware_cfg, scenario.motor_params, scenario.grip_params)
    step = engine.step
    try:
        for t in range(scenario.duration_ticks):
            yield step(open_raw[t], close_raw[t])
    except NonFiniteState as exc:
        # engine.tick has not advanced past the failing step
        raise SimulationFault(engine.tick, exc) from exc


def _fmt(x: float) -> str:
    if x == 0.0:
        return "0"
    return format(x, ".9g")


def record_to_csv_row(rec: TraceRecord) -> str:
    return (
        f"{rec.tick},{rec.open_sw},{rec.close_sw},{rec.ra3},{rec.ra4},"
        f"{rec.rb0},{rec.rb1},{rec.drive_state.value},{_fmt(rec.applied_v)},"
        f"{_fmt(rec.current_a)},{_fmt(rec.omega)},{_fmt(rec.theta_out)},"
        f"{_fmt(rec.grip_force_n)}"
    )


def write_trace(records: Iterable[TraceRecord], path: str | Path) -> int:
    """Stream records to a trace CSV; returns the number of rows written.

    Floats carry 9 significant digits; the header and column order are fixed.
    """
    count = 0
    try:
        with open(path, "w", newline="") as fh:
            fh.write(TRACE_HEADER + "\n")
            for rec in records:
                fh.write(record_to_csv_row(rec) + "\n")
                count += 1
    except OSError as exc:
        raise IoFailure(f"cannot write trace to {path}: {exc}") from exc
    return count
