"""PPO-Clip training loop: rollouts, advantage estimation, minibatch updates."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import NonFiniteGradient
from .adam import Adam, clip_grad_norm
from .buffer import RolloutBuffer, advantages, normalize
from .normalize import RunningNorm
from .policy import GaussianPolicy, ValueFunction, ppo_clip_objective_grad, value_loss_grad

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "lfrl-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.99
    lam: float = 0.95
    clip_eps: float = 0.2
    steps_per_iter: int = 2048
    epochs: int = 10
    minibatch_size: int = 128
    lr_actor: float = 3e-4
    lr_critic: float = 1e-3
    max_grad_norm: float = 0.5
    total_steps: int = 200_000
    hidden: tuple = (64, 64)
    log_std_init: float = -0.5
    ent_coef: float = 0.0
    normalize_advantages: bool = True
    normalize_obs: bool = True
    scale_rewards: bool = False
    anneal_lr: bool = False
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.gamma <= 1 and 0 <= self.lam <= 1):
            raise ValueError("gamma and lambda must lie in [0, 1]")
        if not self.clip_eps > 0:
            raise ValueError("clip epsilon must be positive")


@dataclass
class TrainState:
    policy: GaussianPolicy
    critic: ValueFunction
    opt_actor: Adam
    opt_critic: Adam
    rng: np.random.Generator
    episode_seeds: np.random.SeedSequence
    obs: np.ndarray | None = None
    ep_return: float = 0.0
    ep_len: int = 0
    steps: int = 0
    episode_returns: list = field(default_factory=list)
    ret_norm: RunningNorm | None = None
    ret_acc: float = 0.0


def make_state(env, config: PpoConfig, seed: int) -> TrainState:
    root = np.random.SeedSequence(seed)
    s_actor, s_critic, s_sample, s_env = root.spawn(4)
    norm = RunningNorm(env.obs_dim) if config.normalize_obs else None
    policy = GaussianPolicy(env.obs_dim, env.action_low, env.action_high, config.hidden,
                            np.random.default_rng(s_actor), config.log_std_init, norm)
    critic = ValueFunction(env.obs_dim, config.hidden, np.random.default_rng(s_critic), norm)
    return TrainState(
        policy, critic,
        Adam(policy.params, config.lr_actor), Adam(critic.params, config.lr_critic),
        np.random.default_rng(s_sample), s_env,
        ret_norm=RunningNorm(1) if config.scale_rewards else None,
    )


def scale_rewards(state: TrainState, buf: RolloutBuffer, gamma: float) -> None:
    """Divide rewards by the running std of the discounted return (no centering)."""
    if state.ret_norm is None:
        return
    acc = state.ret_acc
    rets = np.empty(len(buf))
    for t in range(len(buf)):
        acc = gamma * acc + buf.rewards[t]
        rets[t] = acc
        if buf.dones[t]:
            acc = 0.0
    state.ret_acc = acc
    state.ret_norm.update(rets[:, None])
    buf.rewards /= float(np.sqrt(state.ret_norm.var[0] + 1e-8))


def collect_rollout(env, state: TrainState, n_steps: int) -> tuple[RolloutBuffer, list]:
    """Run the current policy for ``n_steps``; episodes carry across calls."""
    policy, critic = state.policy, state.critic
    buf = RolloutBuffer.empty(n_steps, env.obs_dim, policy.act_low.size)
    finished = []
    if state.obs is None:
        state.obs = env.reset(state.episode_seeds.spawn(1)[0])
    obs = state.obs
    for t in range(n_steps):
        action, u, logp = policy.sample(obs, state.rng)
        buf.obs[t] = obs
        buf.u[t] = u
        buf.actions[t] = action
        buf.logp[t] = logp
        buf.values[t] = critic(obs)
        obs, reward, terminated, truncated, _ = env.step(action)
        buf.rewards[t] = reward
        state.ep_return += reward
        state.ep_len += 1
        if terminated or truncated:
            buf.dones[t] = True
            buf.terminated[t] = terminated
            buf.next_values[t] = 0.0 if terminated else critic(obs)
            finished.append((state.ep_return, state.ep_len))
            state.ep_return, state.ep_len = 0.0, 0
            obs = env.reset(state.episode_seeds.spawn(1)[0])
    # bootstrap: within-episode successors are the next stored value
    cont = ~buf.dones[:-1]
    buf.next_values[:-1][cont] = buf.values[1:][cont]
    if not buf.dones[-1]:
        buf.next_values[-1] = critic(obs)
    state.obs = obs
    state.steps += n_steps
    state.episode_returns.extend(r for r, _ in finished)
    return buf, finished


def _check_finite(grads, idx, what):
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite {what} gradient in minibatch", minibatch=idx)


def update(state: TrainState, buf: RolloutBuffer, config: PpoConfig) -> dict:
    """Several epochs of shuffled minibatch Adam steps on the clip objective and value MSE."""
    policy, critic = state.policy, state.critic
    adv = advantages(buf.rewards, buf.values, buf.next_values, buf.dones, config.gamma, config.lam)
    returns = adv + buf.values
    adv_used = normalize(adv) if config.normalize_advantages else adv

    n = len(buf)
    mb = min(config.minibatch_size, n)
    stats = {"policy_obj": [], "value_loss": [], "ratio": [], "clip_frac": [], "approx_kl": []}
    for _ in range(config.epochs):
        perm = state.rng.permutation(n)
        for start in range(0, n, mb):
            idx = perm[start:start + mb]
            obj, g_pi, info = ppo_clip_objective_grad(policy, buf.obs[idx], buf.u[idx], buf.logp[idx],
                                                      adv_used[idx], config.clip_eps)
            vloss, g_v = value_loss_grad(critic, buf.obs[idx], returns[idx])
            _check_finite(g_pi, idx, "policy")
            _check_finite(g_v, idx, "value")
            if config.ent_coef:
                g_pi[-1] = g_pi[-1] + config.ent_coef
            g_pi = [-g for g in g_pi]  # ascent
            clip_grad_norm(g_pi, config.max_grad_norm)
            clip_grad_norm(g_v, config.max_grad_norm)
            state.opt_actor.step(g_pi)
            state.opt_critic.step(g_v)
            policy.clamp_log_std()
            stats["policy_obj"].append(obj)
            stats["value_loss"].append(vloss)
            for k in ("ratio", "clip_frac", "approx_kl"):
                stats[k].append(info[k])
    for p in policy.params + critic.params:
        if not np.all(np.isfinite(p)):
            raise NonFiniteGradient("parameters became non-finite after update")
    if policy.obs_norm is not None:
        # statistics change only between iterations so stored log-probs stay valid
        policy.obs_norm.update(buf.obs)
    return {k: float(np.mean(v)) for k, v in stats.items()}


def train_loop(env_factory, config: PpoConfig, seed: int | None = None, callback=None):
    """Alternate rollouts and updates until ``total_steps``.

    Returns ``(policy, critic, records)``; ``records`` has one dict per
    iteration with keys ``iter, steps, mean_ep_reward, clip_frac,
    value_loss`` plus extra diagnostics.
    """
    seed = config.seed if seed is None else seed
    env = env_factory()
    state = make_state(env, config, seed)
    records = []
    n_iters = max(1, config.total_steps // config.steps_per_iter)
    last_mean = float("nan")
    for it in range(n_iters):
        if config.anneal_lr:
            frac = 1.0 - it / n_iters
            state.opt_actor.lr = config.lr_actor * frac
            state.opt_critic.lr = config.lr_critic * frac
        buf, finished = collect_rollout(env, state, config.steps_per_iter)
        scale_rewards(state, buf, config.gamma)
        diag = update(state, buf, config)
        if finished:
            last_mean = float(np.mean([r for r, _ in finished]))
        rec = {
            "iter": it,
            "steps": state.steps,
            "mean_ep_reward": last_mean,
            "clip_frac": diag["clip_frac"],
            "value_loss": diag["value_loss"],
            "episodes": len(finished),
            "mean_ep_len": float(np.mean([n for _, n in finished])) if finished else float("nan"),
            "approx_kl": diag["approx_kl"],
            "std": np.exp(state.policy.log_std).tolist(),
        }
        records.append(rec)
        log.info("iter %d steps %d reward %.3f len %.0f kl %.4f", it, state.steps, last_mean,
                 rec["mean_ep_len"], diag["approx_kl"])
        if callback is not None:
            callback(state, rec)
    return state.policy, state.critic, records


# -- checkpoints ---------------------------------------------------------


def checkpoint_dict(policy: GaussianPolicy, critic: ValueFunction, config: dict | None = None,
                    rng: np.random.Generator | None = None) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "architecture": {
            "obs_dim": policy.net.sizes[0],
            "hidden": list(policy.hidden),
            "act_dim": policy.net.sizes[-1],
            "activation": "tanh",
            "critic_hidden": list(critic.hidden),
        },
        "action_low": policy.act_low.tolist(),
        "action_high": policy.act_high.tolist(),
        "actor": policy.net.get_flat().tolist(),
        "log_std": policy.log_std.tolist(),
        "critic": critic.net.get_flat().tolist(),
        "obs_norm": policy.obs_norm.state() if policy.obs_norm is not None else None,
        "config": config or {},
        "rng_state": rng.bit_generator.state if rng is not None else None,
    }


def save_checkpoint(path, policy, critic, config=None, rng=None) -> None:
    with open(path, "w") as fh:
        json.dump(checkpoint_dict(policy, critic, config, rng), fh)


def load_checkpoint(path, obs_dim: int | None = None, act_dim: int | None = None):
    """Return ``(policy, critic, payload)``; checks format and architecture."""
    with open(path) as fh:
        try:
            ck = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not a checkpoint ({exc})") from None
    if ck.get("format") != CHECKPOINT_FORMAT or ck.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint format/version")
    arch = ck["architecture"]
    if obs_dim is not None and arch["obs_dim"] != obs_dim:
        raise ValueError(f"{path}: checkpoint expects obs_dim {arch['obs_dim']}, environment has {obs_dim}")
    if act_dim is not None and arch["act_dim"] != act_dim:
        raise ValueError(f"{path}: checkpoint expects act_dim {arch['act_dim']}, environment has {act_dim}")
    norm = RunningNorm.from_state(ck["obs_norm"]) if ck.get("obs_norm") else None
    policy = GaussianPolicy(arch["obs_dim"], ck["action_low"], ck["action_high"], tuple(arch["hidden"]), obs_norm=norm)
    policy.net.set_flat(np.array(ck["actor"]))
    policy.log_std[:] = ck["log_std"]
    critic = ValueFunction(arch["obs_dim"], tuple(arch["critic_hidden"]), obs_norm=norm)
    critic.net.set_flat(np.array(ck["critic"]))
    return policy, critic, ck


def config_dict(config: PpoConfig) -> dict:
    d = asdict(config)
    d["hidden"] = list(d["hidden"])
    return d
