"""Episode lifecycle for the leader-follower driving task.

:class:`DrivingEnv` exposes a gym-style ``reset``/``step`` pair to the
learner and a ground-truth view (:meth:`DrivingEnv.truth`) for the classical
baseline and the metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .controllers import ConstantLeader, OuLeader, OuParams, PdParams, ProfileLeader, ScriptedProfile, pd_steer
from .errors import LeaderBehind
from .perception import (
    OBS_DIM,
    Affordances,
    DelayBuffer,
    PerceptionConfig,
    build_observation,
    observe_lane,
    observe_leader,
)
from .reward import RewardBreakdown, RewardParams, total_reward
from .track import TrackGeometry, build_track, project_to_lane
from .vehicle import Action, VehicleParams, VehicleState, advance_pose, step_vehicle

LOG_HEADER = [
    "t", "ego_x", "ego_y", "ego_psi", "ego_v",
    "lead_x", "lead_y", "lead_psi", "lead_v",
    "gap", "d_delta", "theta_delta", "reward_total",
    "r_safe", "r_eff", "r_lat", "r_orient",
]

NONE, OFF_ROAD, COLLISION, TIME_CAP = "none", "off-road", "collision", "time-cap"


@dataclass
class WorldState:
    ego: VehicleState
    leader: VehicleState | None
    t: float = 0.0
    step_index: int = 0
    episode_over: bool = False
    termination_reason: str = NONE


@dataclass(frozen=True)
class EnvConfig:
    dt: float = 0.05
    t_cap: float = 50.0
    gap_low: float = 0.0
    gap_high: float = 2.0
    leader: str = "ou"  # ou | scripted | constant | none
    constant_speed: float = 0.5
    random_start: bool = True
    terminal_penalty: float = -500.0  # added to the learner's reward on off-road/collision
    ego: VehicleParams = field(default_factory=VehicleParams)
    lead: VehicleParams = field(default_factory=VehicleParams)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    reward: RewardParams = field(default_factory=RewardParams)
    ou: OuParams = field(default_factory=OuParams)
    leader_pd: PdParams = field(default_factory=PdParams)
    profile: ScriptedProfile | None = None

    def with_(self, **kw) -> "EnvConfig":
        return replace(self, **kw)


def center_distance(track: TrackGeometry, ego: VehicleState, leader: VehicleState) -> float:
    """Arclength from ego center forward to leader center, in ``[0, S)``."""
    s_e = project_to_lane(track, ego.x, ego.y, ego.psi).s_arc
    s_l = project_to_lane(track, leader.x, leader.y, leader.psi).s_arc
    return (s_l - s_e) % track.length


def bumper_gap(world: WorldState, params_ego: VehicleParams, params_leader: VehicleParams, track: TrackGeometry) -> float:
    """Along-lane distance from ego front bumper to leader rear bumper.

    Zero means contact.  Raises :class:`LeaderBehind` when the leader is not
    within half a lap ahead.
    """
    d = center_distance(track, world.ego, world.leader)
    if not 0.0 < d <= 0.5 * track.length:
        raise LeaderBehind(f"leader is not ahead of ego (center distance {d:.4g} m)")
    return max(d - 0.5 * (params_ego.body_length + params_leader.body_length), 0.0)


def _gaps(track, ego, leader, l_mean):
    """(forward gap, rearward gap) between the two bodies around the loop."""
    d = center_distance(track, ego, leader)
    return d - l_mean, track.length - d - l_mean


def place_on_center(track: TrackGeometry, s: float, v: float = 0.0) -> VehicleState:
    x, y, h = track.pose_at(s)
    return VehicleState(x, y, h, v)


def reset_episode(config: EnvConfig, track: TrackGeometry, rng: np.random.Generator) -> WorldState:
    """Both vehicles on the lane center at rest, gap ~ U[gap_low, gap_high]."""
    gap = rng.uniform(config.gap_low, config.gap_high)
    s_ego = rng.uniform(0.0, track.length) if config.random_start else 0.0
    ego = place_on_center(track, s_ego)
    if config.leader == "none":
        return WorldState(ego, None)
    s_lead = s_ego + 0.5 * config.ego.body_length + gap + 0.5 * config.lead.body_length
    return WorldState(ego, place_on_center(track, s_lead))


def check_termination(world: WorldState, track: TrackGeometry, t_cap: float, gap: float | None = None,
                      config: EnvConfig | None = None) -> str:
    frame = project_to_lane(track, world.ego.x, world.ego.y, world.ego.psi)
    if not frame.in_drivable:
        return OFF_ROAD
    if world.leader is not None:
        if gap is None:
            cfg = config or EnvConfig()
            fwd, rear = _gaps(track, world.ego, world.leader, 0.5 * (cfg.ego.body_length + cfg.lead.body_length))
            gap = min(fwd, rear)
        if gap <= 0.0:
            return COLLISION
    if world.t >= t_cap - 1e-9:
        return TIME_CAP
    return NONE


@dataclass(frozen=True, slots=True)
class Truth:
    gap: float | None
    dv: float
    v_ego: float
    d_delta: float
    theta_delta: float
    in_drivable: bool


class DrivingEnv:
    """Ego follows a PD-steered leader around a closed track.

    Actions are ``[v_c, phi]`` arrays (or :class:`Action`).  ``step`` returns
    ``(obs, reward, terminated, truncated, info)`` where ``info`` carries the
    reward breakdown, ground truth and termination reason.
    """

    obs_dim = OBS_DIM

    def __init__(self, config: EnvConfig = EnvConfig(), track: TrackGeometry | None = None):
        self.config = config
        self.track = track if track is not None else build_track()
        self.action_low = np.array([0.0, -config.ego.steer_max])
        self.action_high = np.array([config.ego.v_max, config.ego.steer_max])
        self.world: WorldState | None = None
        self._l_mean = 0.5 * (config.ego.body_length + config.lead.body_length)

    # -- lifecycle -------------------------------------------------------

    def reset(self, seed=None) -> np.ndarray:
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        r_reset, r_leader, r_percep = (np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(3))
        cfg = self.config
        self.world = reset_episode(cfg, self.track, r_reset)
        self._rng_percep = r_percep
        if cfg.leader == "ou":
            self._speed_source = OuLeader(cfg.ou, cfg.dt, r_leader)
        elif cfg.leader == "scripted":
            self._speed_source = ProfileLeader(cfg.profile or ScriptedProfile.default())
        elif cfg.leader == "constant":
            self._speed_source = ConstantLeader(cfg.constant_speed)
        elif cfg.leader == "none":
            self._speed_source = None
        else:
            raise ValueError(f"unknown leader mode {cfg.leader!r}")
        self._delay = DelayBuffer(cfg.perception.latency_steps)
        self._prev_action = (0.0, 0.0)
        self._truth = self._compute_truth()
        aff = self._delay.push(self._perceive())
        self._prev_aff = aff
        return self._observation(aff)

    def step(self, action):
        if self.world is None or self.world.episode_over:
            raise RuntimeError("call reset() before step()")
        if not isinstance(action, Action):
            action = Action(float(action[0]), float(action[1]))
        cfg, w = self.config, self.world

        ego = step_vehicle(w.ego, action, cfg.ego, cfg.dt)
        leader = w.leader
        if leader is not None:
            lf = project_to_lane(self.track, leader.x, leader.y, leader.psi)
            phi_l = pd_steer(lf.d_delta, lf.theta_delta, cfg.leader_pd, cfg.lead.steer_max)
            x, y, psi = advance_pose(leader, leader.v, phi_l, cfg.lead.wheelbase, cfg.dt)
            v_next = min(max(self._speed_source.next_speed((w.step_index + 1) * cfg.dt), 0.0), cfg.lead.v_max)
            leader = VehicleState(x, y, psi, v_next)

        w.ego, w.leader = ego, leader
        w.step_index += 1
        w.t = w.step_index * cfg.dt
        self._prev_action = (min(max(action.v_c, 0.0), cfg.ego.v_max),
                             min(max(action.phi, -cfg.ego.steer_max), cfg.ego.steer_max))

        tr = self._truth = self._compute_truth()
        reason = check_termination(w, self.track, cfg.t_cap, gap=self._contact_gap)
        breakdown = total_reward(
            tr.gap, tr.dv, tr.v_ego, cfg.lead.body_length, abs(tr.d_delta), tr.theta_delta, cfg.reward
        )
        if reason == COLLISION:
            breakdown = _collision_breakdown(breakdown, cfg.reward)
        w.termination_reason = reason
        w.episode_over = reason != NONE

        aff = self._delay.push(self._perceive())
        obs = self._observation(aff)
        self._prev_aff = aff
        terminated = reason in (OFF_ROAD, COLLISION)
        reward = breakdown.total + (cfg.terminal_penalty if terminated else 0.0)
        info = {"breakdown": breakdown, "truth": tr, "reason": reason}
        return obs, reward, terminated, reason == TIME_CAP, info

    # -- ground truth ----------------------------------------------------

    def _compute_truth(self) -> Truth:
        w = self.world
        ego = w.ego
        frame = project_to_lane(self.track, ego.x, ego.y, ego.psi)
        if w.leader is None:
            self._contact_gap = math.inf
            return Truth(None, 0.0, ego.v, frame.d_delta, frame.theta_delta, frame.in_drivable)
        fwd, rear = _gaps(self.track, ego, w.leader, self._l_mean)
        self._contact_gap = min(fwd, rear)
        return Truth(max(fwd, 0.0), ego.v - w.leader.v, ego.v, frame.d_delta, frame.theta_delta, frame.in_drivable)

    def truth(self) -> Truth:
        return self._truth

    # -- perception ------------------------------------------------------

    def _perceive(self) -> Affordances:
        cfg, w = self.config, self.world
        d, th = observe_lane(w.ego, self.track, cfg.perception, self._rng_percep)
        ds = observe_leader(w.ego, w.leader, cfg.ego, cfg.lead, cfg.perception, self._rng_percep)
        return Affordances(d, th, ds)

    def _observation(self, aff: Affordances) -> np.ndarray:
        return build_observation(aff, self._prev_aff if self.world.step_index else aff, self.world.ego.v,
                                 self._prev_action, self.track.lane_width, self.config.perception)

    def log_row(self, breakdown: RewardBreakdown) -> list:
        w, tr = self.world, self._truth
        lead = w.leader
        nan = math.nan
        return [
            w.t, w.ego.x, w.ego.y, w.ego.psi, w.ego.v,
            lead.x if lead else nan, lead.y if lead else nan, lead.psi if lead else nan, lead.v if lead else nan,
            tr.gap if tr.gap is not None else nan, tr.d_delta, tr.theta_delta, breakdown.total,
            breakdown.r_safe, breakdown.r_eff, breakdown.r_lat, breakdown.r_orient,
        ]


def _collision_breakdown(b: RewardBreakdown, p: RewardParams) -> RewardBreakdown:
    total = p.w_s * p.r_safe_floor + p.w_e * b.r_eff + p.w_lat * b.r_lat + p.w_orient * b.r_orient
    return RewardBreakdown(p.r_safe_floor, b.r_eff, b.r_lat, b.r_orient, total)
