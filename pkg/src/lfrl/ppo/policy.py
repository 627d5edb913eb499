"""Squashed-Gaussian actor, value critic, and the PPO losses with gradients.

Actions are sampled as ``u ~ N(mean(obs), std)`` in an unbounded space and
mapped to the box ``[low, high]`` through ``tanh``.  Buffers store ``u`` so
log-probabilities can be re-evaluated without inverting the squash.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteInput
from .nn import MLP

LOG_STD_MIN, LOG_STD_MAX = -5.0, 1.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _log1m_tanh2(u):
    """log(1 - tanh(u)^2) without cancellation."""
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


class GaussianPolicy:
    def __init__(self, obs_dim, act_low, act_high, hidden=(64, 64), rng=None, log_std_init=-0.5, obs_norm=None):
        self.obs_norm = obs_norm
        self.act_low = np.asarray(act_low, dtype=float)
        self.act_high = np.asarray(act_high, dtype=float)
        act_dim = self.act_low.size
        self.hidden = tuple(hidden)
        self.net = MLP((obs_dim, *hidden, act_dim), rng, out_scale=0.01)
        self.log_std = np.full(act_dim, float(log_std_init))
        self._center = 0.5 * (self.act_high + self.act_low)
        self._half = 0.5 * (self.act_high - self.act_low)

    @property
    def params(self):
        """Trainable arrays (network weights then log-std)."""
        return self.net.params + [self.log_std]

    def clamp_log_std(self):
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)

    def forward(self, obs):
        obs = np.asarray(obs, dtype=float)
        if not np.all(np.isfinite(obs)):
            raise NonFiniteInput("observation contains NaN or Inf")
        single = obs.ndim == 1
        x = obs[None] if single else obs
        if self.obs_norm is not None:
            x = self.obs_norm(x)
        mean = self.net(x)
        mean = mean[0] if single else mean
        return mean, np.exp(self.log_std)

    def squash(self, u):
        return self._center + self._half * np.tanh(u)

    def unsquash(self, a):
        return np.arctanh((np.asarray(a) - self._center) / self._half)

    def log_prob(self, obs, u):
        """Log-density of the squashed action whose pre-squash value is ``u``."""
        mean, std = self.forward(obs)
        return gaussian_log_prob(u, mean, self.log_std) - self.squash_correction(u)

    def squash_correction(self, u):
        return np.sum(np.log(self._half) + _log1m_tanh2(np.asarray(u)), axis=-1)

    def log_prob_of_action(self, obs, action):
        return self.log_prob(obs, self.unsquash(action))

    def sample(self, obs, rng: np.random.Generator):
        """Return ``(action, u, log_prob)`` for a single observation."""
        mean, std = self.forward(obs)
        u = mean + std * rng.standard_normal(mean.shape)
        return self.squash(u), u, float(gaussian_log_prob(u, mean, self.log_std) - self.squash_correction(u))

    def act_deterministic(self, obs):
        mean, _ = self.forward(obs)
        return self.squash(mean)

    def grad_log_prob(self, obs, u, weights):
        """Gradient of ``sum_i weights_i * log_prob(obs_i, u_i)`` (squash term is parameter-free)."""
        x = np.asarray(obs, dtype=float)
        if self.obs_norm is not None:
            x = self.obs_norm(x)
        mean, cache = self.net.forward(x)
        std = np.exp(self.log_std)
        z = (u - mean) / std
        w = weights[:, None]
        g_mean = w * z / std
        g_log_std = np.sum(w * (z * z - 1.0), axis=0)
        return self.net.backward(cache, g_mean) + [g_log_std]


def gaussian_log_prob(u, mean, log_std):
    z = (u - mean) * np.exp(-log_std)
    return np.sum(-0.5 * z * z - log_std - _HALF_LOG_2PI, axis=-1)


class ValueFunction:
    def __init__(self, obs_dim, hidden=(64, 64), rng=None, obs_norm=None):
        self.obs_norm = obs_norm
        self.hidden = tuple(hidden)
        self.net = MLP((obs_dim, *hidden, 1), rng, out_scale=1.0)

    @property
    def params(self):
        return self.net.params

    def _prep(self, obs):
        x = np.asarray(obs, dtype=float)
        x = x[None] if x.ndim == 1 else x
        return self.obs_norm(x) if self.obs_norm is not None else x

    def __call__(self, obs):
        single = np.ndim(obs) == 1
        out = self.net(self._prep(obs))[:, 0]
        return float(out[0]) if single else out


# -- losses --------------------------------------------------------------


def ppo_clip_objective(policy: GaussianPolicy, obs, u, logp_old, adv, eps):
    """Mean clipped surrogate ``min(r*A, clip(r, 1-eps, 1+eps)*A)``."""
    logp = policy.log_prob(obs, u)
    ratio = np.exp(logp - logp_old)
    return float(np.mean(np.minimum(ratio * adv, np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv)))


def ppo_clip_objective_grad(policy: GaussianPolicy, obs, u, logp_old, adv, eps):
    """``(objective, grads, info)``; grads are w.r.t. ``policy.params``.

    Samples whose clipped branch is the active minimum contribute no gradient.
    """
    logp = policy.log_prob(obs, u)
    ratio = np.exp(logp - logp_old)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    obj = float(np.mean(np.minimum(unclipped, clipped)))
    active = unclipped <= clipped
    n = len(adv)
    weights = np.where(active, ratio * adv, 0.0) / n
    grads = policy.grad_log_prob(obs, u, weights)
    info = {
        "ratio": float(np.mean(ratio)),
        "clip_frac": float(np.mean(np.abs(ratio - 1.0) > eps)),
        "approx_kl": float(np.mean((ratio - 1.0) - (logp - logp_old))),
    }
    return obj, grads, info


def value_loss(critic: ValueFunction, obs, returns):
    v = critic(np.asarray(obs, dtype=float))
    return float(np.mean((v - returns) ** 2))


def value_loss_grad(critic: ValueFunction, obs, returns):
    out, cache = critic.net.forward(critic._prep(obs))
    err = out[:, 0] - returns
    loss = float(np.mean(err * err))
    dout = (2.0 / len(err)) * err[:, None]
    return loss, critic.net.backward(cache, dout)
