"""Grip controller logic: debounce, command resolution, timed drive pulses.

The controller reads two momentary switches on its input pins (RA3 = open,
RA4 = close), debounces them, and drives two output pins (RB0, RB1) that
feed the motor driver. A confirmed press starts a fixed-length drive pulse;
holding the switch re-arms the pulse so a continuous hold gives continuous
drive. Pressing both switches is contradictory and forces an interlock stop
that only clears once both switches are released.

The output pair is never (1, 1): braking goes through (0, 0) and the
bridge's brake-when-enabled behavior, so there is a single stop path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class Mode(Enum):
    IDLE = "Idle"
    OPENING = "Opening"
    CLOSING = "Closing"
    INTERLOCK = "Interlock"


class Command(Enum):
    NONE = "None"
    OPEN = "Open"
    CLOSE = "Close"
    INTERLOCK = "Interlock"


@dataclass(frozen=True, slots=True)
class SwitchFrame:
    """Raw (undebounced) switch levels sampled at one controller tick."""

    open_pressed: bool
    close_pressed: bool
    tick: int = 0

    def __post_init__(self) -> None:
        if self.tick < 0:
            raise ValueError(f"tick must be nonnegative, got {self.tick}")


@dataclass(frozen=True, slots=True)
class PinLevels:
    """Input and output pin levels at one tick."""

    ra3_in: int
    ra4_in: int
    rb0_out: int
    rb1_out: int

    def __post_init__(self) -> None:
        for name in ("ra3_in", "ra4_in", "rb0_out", "rb1_out"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")
        if self.rb0_out and self.rb1_out:
            raise ValueError("rb0_out and rb1_out must never both be 1")


@dataclass(frozen=True, slots=True)
class FirmwareConfig:
    """Controller timing. Defaults: 1 ms tick, 20 ms debounce, 100 ms pulse."""

    tick_period_us: int = 1000
    debounce_ticks: int = 20
    actuation_ticks: int = 100

    def __post_init__(self) -> None:
        if self.tick_period_us <= 0:
            raise ValueError(f"tick_period_us must be positive, got {self.tick_period_us}")
        if self.debounce_ticks < 1:
            raise ValueError(f"debounce_ticks must be >= 1, got {self.debounce_ticks}")
        if self.actuation_ticks < 1:
            raise ValueError(f"actuation_ticks must be >= 1, got {self.actuation_ticks}")


@dataclass(slots=True)
class FirmwareState:
    """Controller state between ticks.

    debounce_open/debounce_close count consecutive ticks the raw level has
    held steady (saturating at debounce_ticks); last_raw_* remember the level
    being counted. stable_* are the debounced switch levels the command logic
    sees.
    """

    mode: Mode = Mode.IDLE
    remaining_ticks: int = 0
    debounce_open: int = 0
    debounce_close: int = 0
    stable_open: bool = False
    stable_close: bool = False
    last_raw_open: bool = False
    last_raw_close: bool = False

    def copy(self) -> FirmwareState:
        return replace(self)

    def debounce(self, open_pressed: bool, close_pressed: bool, cfg: FirmwareConfig) -> None:
        """Advance both debounce counters in place for one tick of raw input."""
        n = cfg.debounce_ticks
        if open_pressed != self.last_raw_open:
            self.last_raw_open = open_pressed
            self.debounce_open = 1
            if n <= 1:
                self.stable_open = open_pressed
        elif self.debounce_open < n:
            self.debounce_open += 1
            if self.debounce_open >= n:
                self.stable_open = open_pressed
        if close_pressed != self.last_raw_close:
            self.last_raw_close = close_pressed
            self.debounce_close = 1
            if n <= 1:
                self.stable_close = close_pressed
        elif self.debounce_close < n:
            self.debounce_close += 1
            if self.debounce_close >= n:
                self.stable_close = close_pressed

    def advance(self, open_pressed: bool, close_pressed: bool, cfg: FirmwareConfig) -> tuple[int, int]:
        """Run one full controller tick in place; return (rb0, rb1).

        Debounce first, then resolve the command and step the mode machine:
        an interlock command wins from any mode, an interlocked controller
        waits for both switches to release, an idle controller starts a pulse
        on a confirmed press, and a running pulse counts down, re-arming at
        zero while its command is still held.
        """
        self.debounce(open_pressed, close_pressed, cfg)
        so = self.stable_open
        sc = self.stable_close
        mode = self.mode
        if so and sc:
            self.mode = Mode.INTERLOCK
            self.remaining_ticks = 0
        elif mode is Mode.INTERLOCK:
            if not so and not sc:
                self.mode = Mode.IDLE
        elif mode is Mode.IDLE:
            if so:
                self.mode = Mode.OPENING
                self.remaining_ticks = cfg.actuation_ticks
            elif sc:
                self.mode = Mode.CLOSING
                self.remaining_ticks = cfg.actuation_ticks
        else:
            self.remaining_ticks -= 1
            if self.remaining_ticks <= 0:
                if (mode is Mode.OPENING and so) or (mode is Mode.CLOSING and sc):
                    self.remaining_ticks = cfg.actuation_ticks
                else:
                    self.mode = Mode.IDLE
                    self.remaining_ticks = 0
        mode = self.mode
        return (1 if mode is Mode.OPENING else 0, 1 if mode is Mode.CLOSING else 0)


def resolve_command(stable_open: bool, stable_close: bool) -> Command:
    """Map the debounced switch pair to a grip command."""
    if stable_open and stable_close:
        return Command.INTERLOCK
    if stable_open:
        return Command.OPEN
    if stable_close:
        return Command.CLOSE
    return Command.NONE


def debounce_update(state: FirmwareState, raw: SwitchFrame, cfg: FirmwareConfig) -> FirmwareState:
    """Pure debounce step: returns the state after one tick of raw input."""
    out = state.copy()
    out.debounce(raw.open_pressed, raw.close_pressed, cfg)
    return out


def firmware_tick(
    state: FirmwareState, raw: SwitchFrame, cfg: FirmwareConfig
) -> tuple[FirmwareState, PinLevels]:
    """Pure full controller tick: returns the next state and the pin levels."""
    out = state.copy()
    rb0, rb1 = out.advance(raw.open_pressed, raw.close_pressed, cfg)
    pins = PinLevels(
        ra3_in=int(raw.open_pressed),
        ra4_in=int(raw.close_pressed),
        rb0_out=rb0,
        rb1_out=rb1,
    )
    return out, pins
