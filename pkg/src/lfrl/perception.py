"""Geometric stand-in for the camera perception pipeline.

Lane affordances are the ground-truth lane frame plus Gaussian noise.  The
leader's circle pattern is projected through a pinhole camera mounted on the
ego front bumper, giving the pixel distance ``d_s = focal_px * D / Z``.
Dropout and a fixed-latency delay line emulate the sim-to-real gap.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .track import TrackGeometry, project_to_lane
from .vehicle import VehicleParams, VehicleState

OBS_DIM = 7


@dataclass(frozen=True)
class PerceptionConfig:
    focal_px: float = 300.0
    circle_spacing: float = 0.05
    fov_half_angle: float = 1.2
    max_range: float = 3.0
    min_range: float = 0.02
    noise_std_d: float = 0.005
    noise_std_theta: float = 0.01
    noise_std_ds: float = 0.1
    dropout_prob: float = 0.02
    latency_steps: int = 1
    ds_scale: float = 0.01
    absent_sentinel: float = 0.0

    def __post_init__(self):
        if not (self.focal_px > 0 and self.circle_spacing > 0):
            raise ValueError("focal_px and circle_spacing must be positive")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must lie in [0, 1]")
        if self.latency_steps < 0:
            raise ValueError("latency_steps must be >= 0")

    @classmethod
    def ideal(cls, **kw) -> "PerceptionConfig":
        """Noise-free, dropout-free, zero-latency configuration."""
        base = dict(noise_std_d=0.0, noise_std_theta=0.0, noise_std_ds=0.0, dropout_prob=0.0, latency_steps=0)
        base.update(kw)
        return cls(**base)


@dataclass(frozen=True, slots=True)
class Affordances:
    d_delta: float
    theta_delta: float
    d_s: float | None  # pixels; None when the leader is not seen


def observe_lane(ego: VehicleState, track: TrackGeometry, config: PerceptionConfig, rng: np.random.Generator):
    frame = project_to_lane(track, ego.x, ego.y, ego.psi)
    nd, nt = rng.standard_normal(2)
    return frame.d_delta + config.noise_std_d * nd, frame.theta_delta + config.noise_std_theta * nt


def pattern_depth(ego: VehicleState, leader: VehicleState, ego_params: VehicleParams, leader_params: VehicleParams):
    """Camera-frame ``(Z, bearing)`` of the leader's rear pattern.

    The camera sits on the ego front bumper looking along the heading.
    """
    c, s = math.cos(ego.psi), math.sin(ego.psi)
    cam_x = ego.x + 0.5 * ego_params.body_length * c
    cam_y = ego.y + 0.5 * ego_params.body_length * s
    px = leader.x - 0.5 * leader_params.body_length * math.cos(leader.psi)
    py = leader.y - 0.5 * leader_params.body_length * math.sin(leader.psi)
    wx, wy = px - cam_x, py - cam_y
    z = wx * c + wy * s
    lateral = -wx * s + wy * c
    return z, math.atan2(lateral, z)


def pinhole_ds(z: float, config: PerceptionConfig) -> float:
    return config.focal_px * config.circle_spacing / max(z, config.min_range)


def observe_leader(
    ego: VehicleState,
    leader: VehicleState | None,
    ego_params: VehicleParams,
    leader_params: VehicleParams,
    config: PerceptionConfig,
    rng: np.random.Generator,
) -> float | None:
    # draw both variates unconditionally so the stream does not depend on visibility
    u_drop, n_px = rng.random(), rng.standard_normal()
    if leader is None:
        return None
    z, bearing = pattern_depth(ego, leader, ego_params, leader_params)
    if z <= 0 or z > config.max_range or abs(bearing) > config.fov_half_angle:
        return None
    if u_drop < config.dropout_prob:
        return None
    ds = pinhole_ds(z, config) + config.noise_std_ds * n_px
    return ds if ds > 0 else None


def build_observation(now: Affordances, prev: Affordances, v_t: float, prev_action, d_w: float,
                      config: PerceptionConfig = PerceptionConfig()) -> np.ndarray:
    """The 7-component state fed to the policy."""

    def scaled(ds):
        return config.absent_sentinel if ds is None else ds * config.ds_scale

    return np.array(
        [
            now.d_delta / d_w,
            now.theta_delta / math.pi,
            v_t,
            scaled(now.d_s),
            scaled(prev.d_s),
            prev_action[0],
            prev_action[1],
        ]
    )


class DelayBuffer:
    """Fixed-latency delay line; warm-up outputs repeat the first input."""

    def __init__(self, latency_steps: int):
        if latency_steps < 0:
            raise ValueError("latency_steps must be >= 0")
        self.latency = latency_steps
        self._q = deque()

    def push(self, item):
        if not self._q:
            self._q.extend([item] * self.latency)
        self._q.append(item)
        return self._q.popleft()

    def reset(self):
        self._q.clear()


def delay_stream(items, latency_steps: int) -> list:
    buf = DelayBuffer(latency_steps)
    return [buf.push(x) for x in items]
