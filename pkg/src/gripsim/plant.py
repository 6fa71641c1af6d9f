"""DC gear motor and gripper mechanics.

Electrical side is quasi-static (armature inductance neglected, far below
the tick period for a small 6 V gear motor):

    i = (V - ke * omega) / R      driven or braking (V = 0, terminals shorted)
    i = 0                         floating terminals

Mechanical side integrates with semi-implicit Euler at the firmware tick:

    omega <- omega + dt * (kt * i - b * omega) / j
    theta <- clamp(theta + dt * omega / N, theta_min, theta_max)

theta is the output aperture angle behind an N:1 reduction with efficiency
eta, so output torque is N * eta * kt * i. The aperture stops are rigid:
running into one kills the shaft speed, and while the drive torque keeps
pressing into the stop the gripper reports a static grip force
N * eta * kt * |i| / lever_arm, clamped to a reporting maximum.

Default parameters are synthetic but sized for a small 6 V gear motor; every
one of them can be overridden per scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .hbridge import DriveState


class NonFiniteState(Exception):
    """A plant variable left the finite range, usually from too large a dt."""


@dataclass(frozen=True, slots=True)
class MotorParams:
    """Electrical and gear-train constants.

    r_ohm      armature resistance [ohm]
    ke         back-EMF constant [V s/rad]
    kt         torque constant [N m/A]
    j          rotor inertia [kg m^2]
    b          viscous friction [N m s/rad]
    gear_ratio reduction N >= 1 (output turns N times slower)
    gear_eff   gear efficiency in (0, 1]
    supply_v   motor supply rail [V]
    """

    r_ohm: float = 2.0
    ke: float = 0.01
    kt: float = 0.01
    j: float = 1e-5
    b: float = 1e-5
    gear_ratio: float = 100.0
    gear_eff: float = 0.8
    supply_v: float = 6.0

    def __post_init__(self) -> None:
        for name in ("r_ohm", "ke", "kt", "j", "b", "gear_ratio", "gear_eff", "supply_v"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.gear_ratio < 1:
            raise ValueError(f"gear_ratio must be >= 1, got {self.gear_ratio}")
        if self.gear_eff > 1:
            raise ValueError(f"gear_eff must be <= 1, got {self.gear_eff}")


@dataclass(frozen=True, slots=True)
class GripParams:
    """Aperture limits and the force-reporting geometry of the gripper."""

    theta_min: float = 0.0
    theta_max: float = 1.2
    lever_arm: float = 0.03
    max_grip_force: float = 50.0

    def __post_init__(self) -> None:
        if self.theta_min >= self.theta_max:
            raise ValueError(
                f"theta_min={self.theta_min} must be below theta_max={self.theta_max}"
            )
        if self.lever_arm <= 0:
            raise ValueError(f"lever_arm must be positive, got {self.lever_arm}")
        if self.max_grip_force <= 0:
            raise ValueError(f"max_grip_force must be positive, got {self.max_grip_force}")


@dataclass(slots=True)
class PlantState:
    """Motor current, shaft speed, output aperture, and reported grip force."""

    current_a: float = 0.0
    omega: float = 0.0
    theta_out: float = 0.0
    grip_force_n: float = 0.0

    def copy(self) -> PlantState:
        return replace(self)

    def advance(
        self,
        drive: DriveState,
        applied_v: float,
        mp: MotorParams,
        gp: GripParams,
        dt: float,
    ) -> None:
        """Integrate one tick in place."""
        kt = mp.kt
        omega0 = self.omega
        if drive is DriveState.HIGH_Z:
            i = 0.0
        elif drive is DriveState.BRAKE:
            i = -mp.ke * omega0 / mp.r_ohm
        else:
            i = (applied_v - mp.ke * omega0) / mp.r_ohm
        omega = omega0 + dt * (kt * i - mp.b * omega0) / mp.j
        theta = self.theta_out + dt * omega / mp.gear_ratio
        # Check before the stops get a chance to mask a diverging integration.
        if not (math.isfinite(i) and math.isfinite(omega) and math.isfinite(theta)):
            raise NonFiniteState(
                f"plant state left the finite range (i={i}, omega={omega}, theta={theta}); "
                "dt is likely too large for the configured stiffness"
            )
        force = 0.0
        theta_min = gp.theta_min
        theta_max = gp.theta_max
        if theta <= theta_min:
            theta = theta_min
            if omega < 0.0:
                omega = 0.0  # hard stop: the closed limit kills inward speed
            tq = kt * i
            if tq < 0.0:
                f = mp.gear_ratio * mp.gear_eff * -tq / gp.lever_arm
                force = f if f < gp.max_grip_force else gp.max_grip_force
        elif theta >= theta_max:
            theta = theta_max
            if omega > 0.0:
                omega = 0.0
            tq = kt * i
            if tq > 0.0:
                f = mp.gear_ratio * mp.gear_eff * tq / gp.lever_arm
                force = f if f < gp.max_grip_force else gp.max_grip_force
        self.current_a = i
        self.omega = omega
        self.theta_out = theta
        self.grip_force_n = force


def plant_step(
    state: PlantState,
    drive: DriveState,
    applied_v: float,
    mp: MotorParams,
    gp: GripParams,
    dt: float,
) -> PlantState:
    """Pure one-tick update: returns the plant state after dt seconds."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    out = state.copy()
    out.advance(drive, applied_v, mp, gp, dt)
    return out


def steady_state_speed(mp: MotorParams, v: float, tau_load_out: float = 0.0) -> float:
    """Closed-form steady motor-shaft speed under voltage v and output load.

    Setting the mechanical balance kt*i = b*omega + tau_load_out/(N*eta) with
    i = (v - ke*omega)/r gives

        omega_ss = (kt*v/r - tau_load_out/(N*eta)) / (b + kt*ke/r)

    Used as the analytic oracle for the integrator.
    """
    return (mp.kt * v / mp.r_ohm - tau_load_out / (mp.gear_ratio * mp.gear_eff)) / (
        mp.b + mp.kt * mp.ke / mp.r_ohm
    )


def output_torque(current_a: float, mp: MotorParams) -> float:
    """Torque at the output shaft: gear_ratio * gear_eff * kt * i."""
    return mp.gear_ratio * mp.gear_eff * mp.kt * current_a
