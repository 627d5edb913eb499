"""Run configuration: TOML loading, defaults with provenance, and a stable hash.

A config file has one table per module (``[env]``, ``[vehicle]``,
``[perception]``, ``[reward]``, ``[idm]``, ``[pd]``, ``[ou]``, ``[ppo]``,
``[eval]``, ``[select]``, ``[plot]``) plus ``[run]`` for seeds, output
directory and track file.  Missing keys fall back to the defaults below;
unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli

from .controllers import IdmParams, OuParams, PdParams, ScriptedProfile
from .env import EnvConfig
from .errors import ConfigError
from .perception import PerceptionConfig
from .ppo.trainer import PpoConfig
from .reward import RewardParams
from .track import build_track, load_track
from .vehicle import VehicleParams


@dataclass(frozen=True)
class EnvSection:
    dt: float = 0.05
    t_cap: float = 50.0
    gap_low: float = 0.0
    gap_high: float = 2.0
    terminal_penalty: float = -500.0


@dataclass(frozen=True)
class EvalSpec:
    agent: str = "drl"  # drl | baseline | both
    leader: str = "ou"  # ou | scripted
    episodes: int = 10
    seed: int = 1000
    profile: str = ""
    checkpoint: str = ""
    deterministic: bool = True


@dataclass(frozen=True)
class SelectSpec:
    """Periodic validation used to keep the best checkpoint during training."""

    every: int = 5
    episodes: int = 10
    seed: int = 500


@dataclass(frozen=True)
class PlotSpec:
    ttc_bin: float = 0.5
    headway_bin: float = 0.25


@dataclass(frozen=True)
class RunSection:
    seeds: tuple = (0, 1, 2)
    out: str = "runs"
    track: str = ""


@dataclass(frozen=True)
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    env: EnvSection = field(default_factory=EnvSection)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    reward: RewardParams = field(default_factory=RewardParams)
    idm: IdmParams = field(default_factory=IdmParams)
    pd: PdParams = field(default_factory=PdParams)
    ou: OuParams = field(default_factory=OuParams)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    eval: EvalSpec = field(default_factory=EvalSpec)
    select: SelectSpec = field(default_factory=SelectSpec)
    plot: PlotSpec = field(default_factory=PlotSpec)

    def with_(self, **sections) -> "RunConfig":
        """Replace individual keys, e.g. ``cfg.with_(eval={"episodes": 1})``."""
        return replace(self, **{k: replace(getattr(self, k), **v) for k, v in sections.items()})

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def hash(self) -> str:
        """Short digest of everything that influences results (output dir excluded)."""
        d = self.to_dict()
        d["run"].pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def out_dir(self) -> Path:
        return Path(os.environ.get("LFRL_OUT") or self.run.out)

    def build_track(self):
        if self.run.track:
            return load_track(self.run.track, lane_width=0.22)
        return build_track()

    def env_config(self, leader: str = "ou") -> EnvConfig:
        profile = ScriptedProfile.from_csv(self.eval.profile) if self.eval.profile else None
        e = self.env
        return EnvConfig(
            dt=e.dt, t_cap=e.t_cap, gap_low=e.gap_low, gap_high=e.gap_high, leader=leader,
            terminal_penalty=e.terminal_penalty, ego=self.vehicle, lead=self.vehicle,
            perception=self.perception, reward=self.reward, ou=self.ou, leader_pd=self.pd,
            profile=profile,
        )


SECTIONS = {f.name: f.type for f in fields(RunConfig)}

# one entry per defaulted field: where the value comes from
PROVENANCE = {
    "run.seeds": "decision: three desk-scale seeds",
    "run.out": "decision",
    "run.track": "decision: empty means the built-in stadium loop (4 m straights, 1 m arcs)",
    "env.dt": "decision: 20 Hz control",
    "env.t_cap": "paper: 50 s evaluation episodes",
    "env.gap_low": "paper: initial gap range",
    "env.gap_high": "paper: initial gap range",
    "env.terminal_penalty": "decision: extra learner-only penalty on off-road/collision",
    "vehicle.body_length": "decision: Duckiebot scale",
    "vehicle.wheelbase": "decision: Duckiebot scale",
    "vehicle.v_max": "decision: Duckiebot scale",
    "vehicle.steer_max": "decision",
    "vehicle.speed_lag": "decision: first-order actuation lag",
    "vehicle.speed_deadband": "decision: motor deadband, tiny speed commands do not move the robot",
    "perception.focal_px": "decision: pinhole focal length",
    "perception.circle_spacing": "decision: pattern circle spacing",
    "perception.fov_half_angle": "decision",
    "perception.max_range": "decision",
    "perception.min_range": "decision",
    "perception.noise_std_d": "decision: sim2real noise",
    "perception.noise_std_theta": "decision: sim2real noise",
    "perception.noise_std_ds": "decision: sim2real noise",
    "perception.dropout_prob": "decision: sim2real dropout",
    "perception.latency_steps": "decision: sim2real latency",
    "perception.ds_scale": "decision: observation scaling",
    "perception.absent_sentinel": "decision",
    "reward.ttc_bound": "paper: TTC threshold",
    "reward.headway_mu": "paper: log-normal headway mean",
    "reward.headway_delta": "paper: log-normal headway std",
    "reward.a_lat": "paper: lateral reward base",
    "reward.k_rc": "paper: lateral reward exponent gain",
    "reward.w_s": "paper: safety weight",
    "reward.w_e": "paper: efficiency weight",
    "reward.w_lat": "paper: lateral weight",
    "reward.w_orient": "paper: orientation weight",
    "reward.r_safe_floor": "decision: clamp for the log safety term",
    "idm.v_des": "paper: baseline controller table",
    "idm.T": "paper: baseline controller table",
    "idm.a_max": "paper: baseline controller table",
    "idm.b_comf": "paper: baseline controller table",
    "idm.g_min": "paper: baseline controller table",
    "idm.hard_brake_factor": "decision: deceleration clamp multiple of b_comf",
    "pd.K_p": "paper: baseline controller table",
    "pd.K_d": "paper: baseline controller table",
    "ou.mu": "decision: leader speed mean",
    "ou.theta": "decision: leader mean reversion",
    "ou.sigma": "decision: leader speed volatility",
    "ou.v_floor": "decision",
    "ou.v_ceil": "decision",
    "ppo.gamma": "decision: common PPO default",
    "ppo.lam": "decision: common PPO default",
    "ppo.clip_eps": "decision: common PPO default",
    "ppo.steps_per_iter": "decision",
    "ppo.epochs": "decision",
    "ppo.minibatch_size": "decision",
    "ppo.lr_actor": "decision",
    "ppo.lr_critic": "decision",
    "ppo.max_grad_norm": "decision",
    "ppo.total_steps": "decision: desk-scale budget",
    "ppo.hidden": "decision",
    "ppo.log_std_init": "decision",
    "ppo.ent_coef": "decision",
    "ppo.normalize_advantages": "decision",
    "ppo.normalize_obs": "decision",
    "ppo.scale_rewards": "decision",
    "ppo.anneal_lr": "decision",
    "ppo.seed": "decision: overridden per run seed",
    "eval.agent": "decision",
    "eval.leader": "paper: random (OU) or scripted leader",
    "eval.episodes": "paper: median over 10 episodes",
    "eval.seed": "decision: evaluation seeds disjoint from training",
    "eval.profile": "decision: empty means the packaged scripted profile",
    "eval.checkpoint": "decision",
    "eval.deterministic": "decision: evaluate the policy mean",
    "select.every": "decision",
    "select.episodes": "decision",
    "select.seed": "decision: validation seeds disjoint from evaluation",
    "plot.ttc_bin": "decision: 0.5 s bins",
    "plot.headway_bin": "decision: 0.25 s bins",
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _coerce(section: str, key: str, value, default):
    where = f"[{section}] {key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return tuple(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    return value


def from_dict(data: dict, base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    updates = {}
    for section, table in data.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        current = getattr(base, section)
        known = {f.name for f in fields(current)}
        kw = {}
        for key, value in table.items():
            if key not in known:
                raise ConfigError(f"[{section}] unknown key {key!r}")
            kw[key] = _coerce(section, key, value, getattr(current, key))
        try:
            updates[section] = replace(current, **kw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] {exc}") from None
    cfg = replace(base, **updates)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    for label, path in (("run.track", cfg.run.track), ("eval.profile", cfg.eval.profile)):
        if path and not Path(path).is_file():
            raise ConfigError(f"{label}: file not found: {path}")
    if cfg.eval.episodes < 1:
        raise ConfigError("eval.episodes must be >= 1")
    if cfg.eval.agent not in ("drl", "baseline", "both"):
        raise ConfigError(f"eval.agent must be drl, baseline or both, got {cfg.eval.agent!r}")
    if cfg.eval.leader not in ("ou", "scripted"):
        raise ConfigError(f"eval.leader must be ou or scripted, got {cfg.eval.leader!r}")
    if not cfg.run.seeds:
        raise ConfigError("run.seeds must not be empty")


def load_config(path=None) -> RunConfig:
    """Read a TOML file (``None`` gives the defaults)."""
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = tomli.loads(p.read_text())
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return from_dict(data)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def default_config_toml(cfg: RunConfig | None = None) -> str:
    """Render a config as TOML, each key annotated with its provenance."""
    cfg = cfg or RunConfig()
    lines = []
    for section in SECTIONS:
        obj = getattr(cfg, section)
        lines.append(f"[{section}]")
        for f in fields(obj):
            value = _toml_value(getattr(obj, f.name))
            lines.append(f"{f.name} = {value}  # provenance: {PROVENANCE[f'{section}.{f.name}']}")
        lines.append("")
    return "\n".join(lines)
