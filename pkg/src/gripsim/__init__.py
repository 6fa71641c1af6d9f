"""gripsim: firmware-in-the-loop simulator for a strain-controlled prosthetic gripper."""

__version__ = "0.1.0"

from .firmware import (
    Command,
    FirmwareConfig,
    FirmwareState,
    Mode,
    PinLevels,
    SwitchFrame,
    debounce_update,
    firmware_tick,
    resolve_command,
)
from .hbridge import (
    BridgeInputs,
    DriveState,
    IndeterminateLogicLevel,
    drive,
    logic_level,
)
from .plant import (
    GripParams,
    MotorParams,
    NonFiniteState,
    PlantState,
    output_torque,
    plant_step,
    steady_state_speed,
)
from .sensors import (
    Condition,
    DegenerateBaseline,
    EmgFeatures,
    EmgProfile,
    EmgTrace,
    InvalidThresholds,
    Position,
    PressureTrace,
    REFERENCE_PROFILE,
    WindowOutOfBounds,
    classify_stress,
    strain_to_switch,
    synthesize_emg,
    window_features,
)
from .scenario import IoFailure, MalformedScenario, Scenario, load_scenario
from .harness import SimEngine, SimulationFault, TraceRecord, run_scenario, write_trace

__all__ = [
    "__version__",
    "BridgeInputs", "Command", "Condition", "DegenerateBaseline", "DriveState",
    "EmgFeatures", "EmgProfile", "EmgTrace", "FirmwareConfig", "FirmwareState",
    "GripParams", "IndeterminateLogicLevel", "InvalidThresholds", "IoFailure",
    "MalformedScenario", "Mode", "MotorParams", "NonFiniteState", "PinLevels",
    "PlantState", "Position", "PressureTrace", "REFERENCE_PROFILE", "Scenario",
    "SimEngine", "SimulationFault", "SwitchFrame", "TraceRecord",
    "WindowOutOfBounds", "classify_stress", "debounce_update", "drive",
    "firmware_tick", "load_scenario", "logic_level", "output_torque",
    "plant_step", "resolve_command", "run_scenario", "steady_state_speed",
    "strain_to_switch", "synthesize_emg", "window_features", "write_trace",
]
