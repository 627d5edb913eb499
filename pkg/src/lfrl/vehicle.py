"""Kinematic bicycle with a first-order speed actuator."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BadTimestep
from .track import wrap_angle


@dataclass(slots=True)
class VehicleState:
    x: float
    y: float
    psi: float
    v: float


@dataclass(frozen=True)
class VehicleParams:
    body_length: float = 0.18
    wheelbase: float = 0.10
    v_max: float = 1.0
    steer_max: float = 0.4
    speed_lag: float = 0.2  # actuator time constant tau_v [s]
    speed_deadband: float = 0.05  # commands below this do not turn the motors [m/s]

    def __post_init__(self):
        for name in ("body_length", "wheelbase", "v_max", "steer_max", "speed_lag"):
            if not getattr(self, name) > 0:
                raise ValueError(f"vehicle parameter {name} must be positive")
        if not 0.0 <= self.speed_deadband < self.v_max:
            raise ValueError("speed_deadband must lie in [0, v_max)")
        if self.steer_max > math.pi / 3:
            raise ValueError("steer_max must not exceed pi/3")


@dataclass(frozen=True, slots=True)
class Action:
    v_c: float
    phi: float


def clip(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def advance_pose(state: VehicleState, v: float, phi: float, wheelbase: float, dt: float) -> tuple[float, float, float]:
    """Euler step of the bicycle pose using speed ``v`` and steering ``phi``."""
    x = state.x + v * math.cos(state.psi) * dt
    y = state.y + v * math.sin(state.psi) * dt
    psi = wrap_angle(state.psi + (v / wheelbase) * math.tan(phi) * dt)
    return x, y, psi


def step_vehicle(state: VehicleState, action: Action, params: VehicleParams, dt: float) -> VehicleState:
    """Advance one timestep.

    Pose integrates with the speed at the start of the step; the new speed
    follows ``v + (dt/tau_v)(v_c - v)`` clamped to ``[0, v_max]``.  Actions
    are clipped to their bounds; a speed command inside the motor deadband
    is a stop command.
    """
    if not dt > 0:
        raise BadTimestep(f"dt must be positive, got {dt}")
    v_c = clip(action.v_c, 0.0, params.v_max)
    if v_c < params.speed_deadband:
        v_c = 0.0
    phi = clip(action.phi, -params.steer_max, params.steer_max)
    v_new = clip(state.v + (dt / params.speed_lag) * (v_c - state.v), 0.0, params.v_max)
    x, y, psi = advance_pose(state, state.v, phi, params.wheelbase, dt)
    return VehicleState(x, y, psi, v_new)
