"""Dual half-bridge motor driver model (L293D-style).

Two logic inputs plus an enable select what the output terminals do:

    enabled, (1, 0)           -> Forward, motor sees +supply
    enabled, (0, 1)           -> Reverse, motor sees -supply
    enabled, (0, 0) or (1, 1) -> Brake, terminals shorted (0 V)
    disabled                  -> HighZ, terminals float

Input voltages are classified against the driver's guaranteed logic bands.
Anything inside the undefined band between them is an error, never a guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

# Guaranteed input bands. Low band per the driver's 0.8 V VIL limit, high
# band per its 2.3 V VIH limit; the gap is electrically undefined.
LOGIC_LOW_MAX_V = 0.8
LOGIC_HIGH_MIN_V = 2.3


class IndeterminateLogicLevel(Exception):
    """Input voltage sits between the guaranteed low and high bands."""


class DriveState(Enum):
    FORWARD = "Forward"
    REVERSE = "Reverse"
    BRAKE = "Brake"
    HIGH_Z = "HighZ"


@dataclass(frozen=True, slots=True)
class BridgeInputs:
    """Analog input pair, enable line, and motor supply rail."""

    in1_v: float
    in2_v: float
    enabled: bool = True
    supply_v: float = 6.0

    def __post_init__(self) -> None:
        if self.supply_v <= 0:
            raise ValueError(f"supply_v must be positive, got {self.supply_v}")
        for name in ("in1_v", "in2_v"):
            v = getattr(self, name)
            if not 0 <= v <= self.supply_v:
                raise ValueError(f"{name}={v} outside [0, supply_v={self.supply_v}]")


def logic_level(v: float) -> int:
    """Classify an input voltage as logic 0 or 1.

    Raises IndeterminateLogicLevel for voltages inside the undefined band;
    callers must treat that as a fault rather than coerce it.
    """
    if v < 0:
        raise ValueError(f"input voltage must be nonnegative, got {v}")
    if v <= LOGIC_LOW_MAX_V:
        return 0
    if v >= LOGIC_HIGH_MIN_V:
        return 1
    raise IndeterminateLogicLevel(
        f"{v} V is inside the undefined band ({LOGIC_LOW_MAX_V}, {LOGIC_HIGH_MIN_V}) V"
    )


def drive_logic(level1: int, level2: int, enabled: bool, supply_v: float) -> tuple[DriveState, float]:
    """Truth table on already-resolved logic levels.

    Returns the drive state and the voltage applied across the motor.
    The voltage is 0.0 for Brake (terminals shorted) and for HighZ, where
    it is meaningless because the terminals are disconnected.
    """
    if not enabled:
        return DriveState.HIGH_Z, 0.0
    if level1 and not level2:
        return DriveState.FORWARD, supply_v
    if level2 and not level1:
        return DriveState.REVERSE, -supply_v
    return DriveState.BRAKE, 0.0


def drive(inputs: BridgeInputs) -> tuple[DriveState, float]:
    """Resolve analog inputs to a drive state and applied motor voltage."""
    return drive_logic(
        logic_level(inputs.in1_v),
        logic_level(inputs.in2_v),
        inputs.enabled,
        inputs.supply_v,
    )
