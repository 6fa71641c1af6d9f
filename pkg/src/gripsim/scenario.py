"""Scenario files: the single source of configuration for a simulation run.

A scenario is a JSON object; every key is optional and defaults are filled
in, but unknown keys anywhere in the tree are rejected outright so a typo
cannot silently fall back to a default. Switch activity comes either from an
explicit event list, from pressure-trace CSVs pushed through the hysteresis
comparator, or (experimentally) from thresholded EMG RMS.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .firmware import FirmwareConfig
from .plant import GripParams, MotorParams
from .sensors import Condition, EmgProfile, Position


class MalformedScenario(Exception):
    """Scenario or override content failed validation."""

    def __init__(self, field_path: str, reason: str) -> None:
        self.field = field_path
        self.reason = reason
        super().__init__(f"{field_path}: {reason}")


class IoFailure(Exception):
    """A scenario or trace file could not be read or written."""


SWITCH_NAMES = ("open", "close")
ACTION_NAMES = ("press", "release")


@dataclass(frozen=True)
class SwitchEvent:
    tick: int
    switch: str  # "open" | "close"
    action: str  # "press" | "release"


@dataclass(frozen=True)
class DirectSwitches:
    """Switch activity driven directly by the scenario event list."""


@dataclass(frozen=True)
class PressureChannel:
    file: str
    threshold_on_kpa: float
    threshold_off_kpa: float


@dataclass(frozen=True)
class PressureTraces:
    """Switch activity from pressure-trace CSVs (one per wired switch)."""

    open: PressureChannel | None = None
    close: PressureChannel | None = None


@dataclass(frozen=True)
class EmgRmsSource:
    """Experimental: one switch driven by thresholded EMG RMS."""

    switch: str = "close"
    position: Position = Position.S1
    condition: Condition = Condition.RELAXED
    window_samples: int = 64
    threshold_on_uv: float = 60.0
    threshold_off_uv: float = 40.0


SensorSource = DirectSwitches | PressureTraces | EmgRmsSource


@dataclass(frozen=True)
class Scenario:
    name: str = "unnamed"
    seed: int = 0
    tick_period_us: int = 1000
    duration_ticks: int = 1000
    firmware_cfg: FirmwareConfig = field(default_factory=FirmwareConfig)
    motor_params: MotorParams = field(default_factory=MotorParams)
    grip_params: GripParams = field(default_factory=GripParams)
    events: tuple[SwitchEvent, ...] = ()
    sensor_source: SensorSource = field(default_factory=DirectSwitches)
    emg_profile: EmgProfile | None = None

    def __post_init__(self) -> None:
        # The scenario-level tick period is authoritative; keep the firmware
        # config coherent for directly constructed scenarios too.
        if self.firmware_cfg.tick_period_us != self.tick_period_us:
            object.__setattr__(
                self,
                "firmware_cfg",
                replace(self.firmware_cfg, tick_period_us=self.tick_period_us),
            )

    @property
    def dt_s(self) -> float:
        return self.tick_period_us * 1e-6

    @property
    def tick_rate_hz(self) -> float:
        return 1e6 / self.tick_period_us


def _require_keys(obj: Mapping[str, Any], allowed: tuple[str, ...], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise MalformedScenario(f"{path}.{key}" if path else key, "unknown key")


def _get_number(obj: Mapping[str, Any], key: str, path: str, default: float) -> float:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedScenario(f"{path}.{key}" if path else key, "must be a number")
    if not math.isfinite(value):
        raise MalformedScenario(f"{path}.{key}" if path else key, "must be finite")
    return float(value)


def _get_int(obj: Mapping[str, Any], key: str, path: str, default: int) -> int:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedScenario(f"{path}.{key}" if path else key, "must be an integer")
    return value


def _get_str(obj: Mapping[str, Any], key: str, path: str, default: str) -> str:
    value = obj.get(key, default)
    if not isinstance(value, str):
        raise MalformedScenario(f"{path}.{key}" if path else key, "must be a string")
    return value


def _build(cls: type, kwargs: dict[str, Any], path: str):
    # Dataclass invariants raise ValueError; surface them with the field path.
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise MalformedScenario(path, str(exc)) from exc


def _parse_firmware_cfg(obj: Any, tick_period_us: int, path: str = "firmware_cfg") -> FirmwareConfig:
    if not isinstance(obj, dict):
        raise MalformedScenario(path, "must be an object")
    _require_keys(obj, ("debounce_ticks", "actuation_ticks"), path)
    return _build(
        FirmwareConfig,
        dict(
            tick_period_us=tick_period_us,
            debounce_ticks=_get_int(obj, "debounce_ticks", path, 20),
            actuation_ticks=_get_int(obj, "actuation_ticks", path, 100),
        ),
        path,
    )


_MOTOR_FIELDS = ("r_ohm", "ke", "kt", "j", "b", "gear_ratio", "gear_eff", "supply_v")
_GRIP_FIELDS = ("theta_min", "theta_max", "lever_arm", "max_grip_force")


def _parse_motor_params(obj: Any, path: str = "motor_params") -> MotorParams:
    if not isinstance(obj, dict):
        raise MalformedScenario(path, "must be an object")
    _require_keys(obj, _MOTOR_FIELDS, path)
    defaults = MotorParams()
    kwargs = {}
    for key in _MOTOR_FIELDS:
        if key in obj:
            kwargs[key] = _get_number(obj, key, path, 0.0)
            if kwargs[key] <= 0:
                raise MalformedScenario(f"{path}.{key}", "must be strictly positive")
        else:
            kwargs[key] = getattr(defaults, key)
    return _build(MotorParams, kwargs, path)


def _parse_grip_params(obj: Any, path: str = "grip_params") -> GripParams:
    if not isinstance(obj, dict):
        raise MalformedScenario(path, "must be an object")
    _require_keys(obj, _GRIP_FIELDS, path)
    defaults = GripParams()
    kwargs = {}
    for key in _GRIP_FIELDS:
        kwargs[key] = _get_number(obj, key, path, getattr(defaults, key))
    return _build(GripParams, kwargs, path)


def _parse_events(obj: Any, duration_ticks: int) -> tuple[SwitchEvent, ...]:
    if not isinstance(obj, list):
        raise MalformedScenario("events", "must be a list")
    events = []
    last_tick = -1
    for idx, item in enumerate(obj):
        path = f"events[{idx}]"
        if not isinstance(item, dict):
            raise MalformedScenario(path, "must be an object")
        _require_keys(item, ("tick", "switch", "action"), path)
        for key in ("tick", "switch", "action"):
            if key not in item:
                raise MalformedScenario(f"{path}.{key}", "is required")
        tick = _get_int(item, "tick", path, 0)
        switch = _get_str(item, "switch", path, "")
        action = _get_str(item, "action", path, "")
        if tick < 0 or tick >= duration_ticks:
            raise MalformedScenario(f"{path}.tick", f"must be in [0, {duration_ticks})")
        if switch not in SWITCH_NAMES:
            raise MalformedScenario(f"{path}.switch", "must be 'open' or 'close'")
        if action not in ACTION_NAMES:
            raise MalformedScenario(f"{path}.action", "must be 'press' or 'release'")
        if tick < last_tick:
            raise MalformedScenario("events", "not sorted")
        last_tick = tick
        events.append(SwitchEvent(tick, switch, action))
    return tuple(events)


def _parse_pressure_channel(obj: Any, path: str, base_dir: Path) -> PressureChannel:
    if not isinstance(obj, dict):
        raise MalformedScenario(path, "must be an object")
    _require_keys(obj, ("file", "threshold_on_kpa", "threshold_off_kpa"), path)
    for key in ("file", "threshold_on_kpa", "threshold_off_kpa"):
        if key not in obj:
            raise MalformedScenario(f"{path}.{key}", "is required")
    file = _get_str(obj, "file", path, "")
    on = _get_number(obj, "threshold_on_kpa", path, 0.0)
    off = _get_number(obj, "threshold_off_kpa", path, 0.0)
    if off >= on:
        raise MalformedScenario(
            f"{path}.threshold_off_kpa", "must be below threshold_on_kpa"
        )
    return PressureChannel(str((base_dir / file).resolve()), on, off)


def _parse_sensor_source(obj: Any, base_dir: Path) -> SensorSource:
    path = "sensor_source"
    if not isinstance(obj, dict):
        raise MalformedScenario(path, "must be an object")
    kind = _get_str(obj, "type", path, "")
    if kind == "direct_switches":
        _require_keys(obj, ("type",), path)
        return DirectSwitches()
    if kind == "pressure_traces":
        _require_keys(obj, ("type", "open", "close"), path)
        channels: dict[str, PressureChannel | None] = {"open": None, "close": None}
        for name in SWITCH_NAMES:
            if name in obj:
                channels[name] = _parse_pressure_channel(obj[name], f"{path}.{name}", base_dir)
        if channels["open"] is None and channels["close"] is None:
            raise MalformedScenario(path, "pressure_traces needs an 'open' or 'close' channel")
        return PressureTraces(open=channels["open"], close=channels["close"])
    if kind == "emg_rms":
        allowed = (
            "type", "switch", "position", "condition",
            "window_samples", "threshold_on_uv", "threshold_off_uv",
        )
        _require_keys(obj, allowed, path)
        switch = _get_str(obj, "switch", path, "close")
        if switch not in SWITCH_NAMES:
            raise MalformedScenario(f"{path}.switch", "must be 'open' or 'close'")
        pos_name = _get_str(obj, "position", path, "S1")
        try:
            position = Position(pos_name)
        except ValueError:
            raise MalformedScenario(f"{path}.position", "must be one of S1, S2, S3, S4") from None
        cond_name = _get_str(obj, "condition", path, "Relaxed")
        if cond_name not in ("Relaxed", "Stressed"):
            raise MalformedScenario(f"{path}.condition", "must be 'Relaxed' or 'Stressed'")
        window = _get_int(obj, "window_samples", path, 64)
        if window < 1:
            raise MalformedScenario(f"{path}.window_samples", "must be >= 1")
        on = _get_number(obj, "threshold_on_uv", path, 60.0)
        off = _get_number(obj, "threshold_off_uv", path, 40.0)
        if off >= on:
            raise MalformedScenario(f"{path}.threshold_off_uv", "must be below threshold_on_uv")
        return EmgRmsSource(switch, position, Condition(cond_name), window, on, off)
    raise MalformedScenario(
        f"{path}.type", "must be 'direct_switches', 'pressure_traces' or 'emg_rms'"
    )


def _parse_emg_profile(obj: Any, path: str = "emg_profile") -> EmgProfile:
    if not isinstance(obj, dict):
        raise MalformedScenario(path, "must be an object")
    _require_keys(obj, ("amplitudes_uv", "seed", "duration_s", "sample_rate_hz"), path)
    seed = _get_int(obj, "seed", path, 0)
    duration_s = _get_number(obj, "duration_s", path, 30.029)
    rate = _get_number(obj, "sample_rate_hz", path, 1000.0)
    amplitudes: dict[Position, tuple[float, float]] = dict(EmgProfile().amplitudes_uv)
    if "amplitudes_uv" in obj:
        amps = obj["amplitudes_uv"]
        if not isinstance(amps, dict):
            raise MalformedScenario(f"{path}.amplitudes_uv", "must be an object")
        for key, pair in amps.items():
            try:
                pos = Position(key)
            except ValueError:
                raise MalformedScenario(
                    f"{path}.amplitudes_uv.{key}", "must be one of S1, S2, S3, S4"
                ) from None
            ppath = f"{path}.amplitudes_uv.{key}"
            if not isinstance(pair, dict):
                raise MalformedScenario(ppath, "must be an object with 'relaxed' and 'stressed'")
            _require_keys(pair, ("relaxed", "stressed"), ppath)
            relaxed = _get_number(pair, "relaxed", ppath, amplitudes[pos][0])
            stressed = _get_number(pair, "stressed", ppath, amplitudes[pos][1])
            if relaxed < 0 or stressed < 0:
                raise MalformedScenario(ppath, "amplitudes must be nonnegative")
            amplitudes[pos] = (relaxed, stressed)
    return _build(
        EmgProfile,
        dict(amplitudes_uv=amplitudes, seed=seed, duration_s=duration_s, sample_rate_hz=rate),
        path,
    )


_TOP_KEYS = (
    "name", "seed", "tick_period_us", "duration_ticks",
    "firmware_cfg", "motor_params", "grip_params",
    "events", "sensor_source", "emg_profile",
)


def parse_scenario(data: Any, base_dir: str | Path = ".") -> Scenario:
    """Validate a decoded JSON object into a Scenario, filling defaults."""
    base_dir = Path(base_dir)
    if not isinstance(data, dict):
        raise MalformedScenario("<root>", "scenario must be a JSON object")
    _require_keys(data, _TOP_KEYS, "")
    name = _get_str(data, "name", "", "unnamed")
    seed = _get_int(data, "seed", "", 0)
    tick_period_us = _get_int(data, "tick_period_us", "", 1000)
    if tick_period_us <= 0:
        raise MalformedScenario("tick_period_us", "must be positive")
    duration_ticks = _get_int(data, "duration_ticks", "", 1000)
    if duration_ticks <= 0:
        raise MalformedScenario("duration_ticks", "must be positive")
    firmware_cfg = _parse_firmware_cfg(data.get("firmware_cfg", {}), tick_period_us)
    motor_params = _parse_motor_params(data.get("motor_params", {}))
    grip_params = _parse_grip_params(data.get("grip_params", {}))
    events = _parse_events(data.get("events", []), duration_ticks)
    sensor_source = _parse_sensor_source(
        data.get("sensor_source", {"type": "direct_switches"}), base_dir
    )
    if events and not isinstance(sensor_source, DirectSwitches):
        raise MalformedScenario("events", "only allowed with sensor_source type 'direct_switches'")
    emg_profile = None
    if "emg_profile" in data:
        emg_profile = _parse_emg_profile(data["emg_profile"])
    if isinstance(sensor_source, EmgRmsSource) and emg_profile is None:
        emg_profile = EmgProfile()
    return Scenario(
        name=name,
        seed=seed,
        tick_period_us=tick_period_us,
        duration_ticks=duration_ticks,
        firmware_cfg=firmware_cfg,
        motor_params=motor_params,
        grip_params=grip_params,
        events=events,
        sensor_source=sensor_source,
        emg_profile=emg_profile,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedScenario("<root>", f"invalid JSON: {exc}") from exc
    return parse_scenario(data, base_dir=path.parent)


def parse_overrides(overrides: Mapping[str, Any]) -> Scenario:
    """Validate live-session config overrides (a scenario subset).

    Accepts tick_period_us, firmware_cfg, motor_params and grip_params;
    event/sensor keys make no sense for a live session and are rejected.
    """
    if not isinstance(overrides, Mapping):
        raise MalformedScenario("<root>", "overrides must be an object")
    allowed = ("tick_period_us", "firmware_cfg", "motor_params", "grip_params", "name", "seed")
    _require_keys(overrides, allowed, "")
    return parse_scenario(dict(overrides))
