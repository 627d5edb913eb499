"""Classical controllers and leader speed generators.

IDM for longitudinal control, a PD law for lateral control, an exactly
discretised Ornstein-Uhlenbeck speed process and a piecewise-linear scripted
speed profile.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import BadTimestep, ZeroGap
from .vehicle import Action, VehicleParams, clip


@dataclass(frozen=True)
class IdmParams:
    v_des: float = 1.0
    T: float = 1.0
    a_max: float = 1.0
    b_comf: float = 1.0
    g_min: float = 0.2
    hard_brake_factor: float = 3.0

    @property
    def b_hard(self) -> float:
        return self.hard_brake_factor * self.b_comf


@dataclass(frozen=True)
class PdParams:
    K_p: float = 2.0
    K_d: float = 5.0


@dataclass(frozen=True)
class OuParams:
    mu: float = 0.45
    theta: float = 0.3
    sigma: float = 0.25
    v_floor: float = 0.0
    v_ceil: float = 0.8

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("OU rate must be positive")
        if not 0 <= self.v_floor < self.v_ceil:
            raise ValueError("need 0 <= v_floor < v_ceil")


def desired_gap(v: float, dv: float, p: IdmParams) -> float:
    return p.g_min + max(0.0, v * p.T + v * dv / (2.0 * math.sqrt(p.a_max * p.b_comf)))


def idm_accel(v: float, dv: float, gap: float, p: IdmParams = IdmParams()) -> float:
    """IDM acceleration; ``dv = v_ego - v_leader`` (positive when closing).

    ``gap = inf`` gives the free-road term only.  The result is clamped to
    ``[-b_hard, a_max]``.
    """
    if not gap > 0:
        raise ZeroGap(f"IDM needs a positive gap, got {gap}")
    free = 1.0 - (v / p.v_des) ** 4
    interaction = (desired_gap(v, dv, p) / gap) ** 2 if math.isfinite(gap) else 0.0
    return clip(p.a_max * (free - interaction), -p.b_hard, p.a_max)


def equilibrium_gap(v: float, p: IdmParams = IdmParams()) -> float:
    """Steady-state IDM gap behind a leader moving at constant ``v``."""
    return (p.g_min + v * p.T) / math.sqrt(1.0 - (v / p.v_des) ** 4)


def pd_steer(d_delta: float, theta_delta: float, p: PdParams = PdParams(), steer_max: float = math.inf) -> float:
    # positive d_delta is left of center, so steer right
    return clip(-(p.K_p * d_delta + p.K_d * theta_delta), -steer_max, steer_max)


def ou_step(v: float, p: OuParams, dt: float, rng: np.random.Generator) -> float:
    """One exact-discretisation OU transition, then clamp to the speed band."""
    if not dt > 0:
        raise BadTimestep(f"dt must be positive, got {dt}")
    decay = math.exp(-p.theta * dt)
    scale = p.sigma * math.sqrt((1.0 - decay * decay) / (2.0 * p.theta))
    nxt = v * decay + p.mu * (1.0 - decay) + scale * rng.standard_normal()
    return clip(nxt, p.v_floor, p.v_ceil)


class ScriptedProfile:
    """Piecewise-linear speed profile over ``(t, v)`` breakpoints.

    Before the first breakpoint the first speed applies; after the last one
    the final speed is held.
    """

    def __init__(self, times, speeds):
        t = np.asarray(times, dtype=float)
        v = np.asarray(speeds, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise ValueError("profile needs equal-length 1-D time and speed arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("profile times must be strictly increasing")
        if np.any(v < 0):
            raise ValueError("profile speeds must be non-negative")
        self.times = t
        self.speeds = v

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.speeds))

    @classmethod
    def from_csv(cls, path) -> "ScriptedProfile":
        with open(path, newline="") as fh:
            return cls._from_rows(csv.reader(fh), str(path))

    @classmethod
    def default(cls) -> "ScriptedProfile":
        text = resources.files("lfrl.data").joinpath("scripted_profile.csv").read_text()
        return cls._from_rows(csv.reader(text.splitlines()), "scripted_profile.csv")

    @classmethod
    def _from_rows(cls, rows, name):
        rows = [r for r in rows if r and not r[0].lstrip().startswith("#")]
        if not rows or [c.strip() for c in rows[0]] != ["t_s", "v_mps"]:
            raise ValueError(f"{name}: expected header 't_s,v_mps'")
        try:
            pts = [(float(a), float(b)) for a, b in rows[1:]]
        except ValueError as exc:
            raise ValueError(f"{name}: bad profile row ({exc})") from None
        return cls([p[0] for p in pts], [p[1] for p in pts])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_s", "v_mps"])
            w.writerows([[repr(float(a)), repr(float(b))] for a, b in zip(self.times, self.speeds)])


def scripted_profile(t: float) -> float:
    """Speed of the default safety-critical leader profile at time ``t``."""
    return _default_profile()(t)


_DEFAULT = None


def _default_profile():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ScriptedProfile.default()
    return _DEFAULT


# -- leader speed sources -------------------------------------------------


class OuLeader:
    """Random leader speed trajectory driven by :func:`ou_step`."""

    def __init__(self, params: OuParams, dt: float, rng: np.random.Generator, v0: float = 0.0):
        self.params = params
        self.dt = dt
        self.rng = rng
        self.v = v0

    def next_speed(self, t_next: float) -> float:
        self.v = ou_step(self.v, self.params, self.dt, self.rng)
        return self.v


class ProfileLeader:
    def __init__(self, profile):
        self.profile = profile

    def next_speed(self, t_next: float) -> float:
        return self.profile(t_next)


class ConstantLeader:
    def __init__(self, speed: float):
        self.speed = speed

    def next_speed(self, t_next: float) -> float:
        return self.speed


class BaselineAgent:
    """IDM speed control plus PD steering, both fed ground truth.

    The IDM acceleration is converted to a speed command that makes the
    first-order actuator realise exactly that acceleration over one step.
    """

    def __init__(self, idm: IdmParams, pd: PdParams, vehicle: VehicleParams):
        self.idm = idm
        self.pd = pd
        self.vehicle = vehicle

    def act(self, v: float, dv: float, gap: float, d_delta: float, theta_delta: float) -> Action:
        a = idm_accel(v, dv, gap, self.idm) if gap > 0 else -self.idm.b_hard
        v_c = clip(v + a * self.vehicle.speed_lag, 0.0, self.vehicle.v_max)
        return Action(v_c, pd_steer(d_delta, theta_delta, self.pd, self.vehicle.steer_max))


def follow_constant_leader(v_leader: float, idm: IdmParams = IdmParams(), vehicle: VehicleParams = VehicleParams(),
                           dt: float = 0.05, t_end: float = 120.0, gap0: float = 2.0, v0: float = 0.0):
    """Straight-line IDM following of a constant-speed leader.

    The ego goes through the same speed-command mapping and actuator lag as
    :class:`BaselineAgent` in the full simulator.  Returns ``(t, gap, v)``
    arrays sampled after each step.
    """
    from .vehicle import VehicleState, step_vehicle

    agent = BaselineAgent(idm, PdParams(), vehicle)
    ego = VehicleState(0.0, 0.0, 0.0, v0)
    x_lead = gap0 + vehicle.body_length
    n = int(round(t_end / dt))
    ts, gaps, vs = np.empty(n), np.empty(n), np.empty(n)
    for k in range(n):
        gap = x_lead - ego.x - vehicle.body_length
        ego = step_vehicle(ego, agent.act(ego.v, ego.v - v_leader, gap, 0.0, 0.0), vehicle, dt)
        x_lead += v_leader * dt
        ts[k], gaps[k], vs[k] = (k + 1) * dt, x_lead - ego.x - vehicle.body_length, ego.v
    return ts, gaps, vs
