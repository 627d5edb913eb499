"""Rollout storage, rewards-to-go and generalized advantage estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def rewards_to_go(rewards, dones, gamma: float, bootstrap=None) -> np.ndarray:
    """Discounted sum of future rewards within each episode.

    ``dones[t]`` marks the last step of an episode.  ``bootstrap[t]``, if
    given, is added (discounted) after step ``t`` when the episode was cut
    rather than terminated.
    """
    rewards = np.asarray(rewards, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    out = np.empty_like(rewards)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        if dones[t]:
            acc = 0.0 if bootstrap is None else bootstrap[t]
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def advantages(rewards, values, next_values, dones, gamma: float, lam: float) -> np.ndarray:
    """GAE(gamma, lambda), not normalised.

    ``next_values[t]`` is the value of the state reached after step ``t``:
    0 after a genuine termination, ``V(s_T)`` after a time-cap cut or at the
    end of the rollout.  ``dones[t]`` stops the recursion at episode ends.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    next_values = np.asarray(next_values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    deltas = rewards + gamma * next_values - values
    adv = np.empty_like(deltas)
    acc = 0.0
    for t in range(len(deltas) - 1, -1, -1):
        if dones[t]:
            acc = 0.0
        acc = deltas[t] + gamma * lam * acc
        adv[t] = acc
    return adv


def normalize(x: np.ndarray) -> np.ndarray:
    return (x - x.mean()) / (x.std() + 1e-8)


@dataclass
class RolloutBuffer:
    obs: np.ndarray
    u: np.ndarray
    actions: np.ndarray
    logp: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    next_values: np.ndarray
    dones: np.ndarray  # episode boundary (terminated or truncated)
    terminated: np.ndarray

    @classmethod
    def empty(cls, n: int, obs_dim: int, act_dim: int) -> "RolloutBuffer":
        return cls(
            np.zeros((n, obs_dim)), np.zeros((n, act_dim)), np.zeros((n, act_dim)), np.zeros(n),
            np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n, dtype=bool), np.zeros(n, dtype=bool),
        )

    def __len__(self) -> int:
        return len(self.rewards)
