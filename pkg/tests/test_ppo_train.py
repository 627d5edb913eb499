import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfrl.errors import NonFiniteGradient, NonFiniteInput
from lfrl.ppo.policy import GaussianPolicy, ValueFunction
from lfrl.ppo.trainer import (
    PpoConfig,
    collect_rollout,
    load_checkpoint,
    make_state,
    save_checkpoint,
    train_loop,
    update,
)


class Bandit:
    """One-step episodes; state 0 pays for a negative action, state 1 for a positive one."""

    obs_dim = 2
    action_low = np.array([-1.0])
    action_high = np.array([1.0])

    def __init__(self, reward_scale=1.0):
        self.scale = reward_scale
        self.rng = None
        self.s = 0

    def _obs(self):
        return np.eye(2)[self.s]

    def reset(self, seed):
        self.rng = np.random.default_rng(seed)
        self.s = int(self.rng.integers(2))
        return self._obs()

    @staticmethod
    def payoff(s, a):
        return float((a > 0) == (s == 1))

    def step(self, action):
        r = self.scale * self.payoff(self.s, float(action[0]))
        self.s = int(self.rng.integers(2))
        return self._obs(), r, True, False, {}


def bandit_optimum():
    # brute force over deterministic maps state -> action sign
    best = 0.0
    for a0, a1 in itertools.product((-1.0, 1.0), repeat=2):
        best = max(best, 0.5 * (Bandit.payoff(0, a0) + Bandit.payoff(1, a1)))
    return best


SMALL = PpoConfig(steps_per_iter=64, minibatch_size=32, epochs=4, hidden=(16,), total_steps=64 * 200,
                  lr_actor=3e-3, lr_critic=3e-3, scale_rewards=False, normalize_obs=False)


def test_bandit_reaches_optimum():
    assert bandit_optimum() == 1.0
    pol, _, recs = train_loop(Bandit, SMALL, seed=0)
    assert len(recs) == 200
    assert recs[-1]["mean_ep_reward"] >= 0.95 * bandit_optimum()
    assert pol.act_deterministic(np.eye(2)[0])[0] < 0 < pol.act_deterministic(np.eye(2)[1])[0]


def test_zero_learning_rate_is_null_update():
    cfg = PpoConfig(steps_per_iter=64, minibatch_size=32, epochs=2, hidden=(8,), lr_actor=0.0, lr_critic=0.0,
                    normalize_obs=False)
    env = Bandit()
    state = make_state(env, cfg, 0)
    before = [p.copy() for p in state.policy.params + state.critic.params]
    buf, _ = collect_rollout(env, state, 64)
    update(state, buf, cfg)
    after = state.policy.params + state.critic.params
    assert all(np.array_equal(a, b) for a, b in zip(before, after))


def test_one_iteration_when_total_equals_batch():
    cfg = PpoConfig(steps_per_iter=64, minibatch_size=32, hidden=(8,), total_steps=64)
    _, _, recs = train_loop(Bandit, cfg, seed=1)
    assert len(recs) == 1 and recs[0]["steps"] == 64


def test_same_seed_same_records():
    cfg = PpoConfig(steps_per_iter=64, minibatch_size=32, epochs=2, hidden=(8,), total_steps=64 * 5)
    a = train_loop(Bandit, cfg, seed=3)[2]
    b = train_loop(Bandit, cfg, seed=3)[2]
    c = train_loop(Bandit, cfg, seed=4)[2]
    assert a == b
    assert a != c


def test_nan_reward_raises_nonfinite_gradient():
    cfg = PpoConfig(steps_per_iter=32, minibatch_size=16, hidden=(8,), total_steps=32, scale_rewards=False)
    with pytest.raises(NonFiniteGradient) as exc:
        train_loop(lambda: Bandit(reward_scale=float("nan")), cfg, seed=0)
    assert exc.value.minibatch is not None


def _policy(seed=0, **kw):
    return GaussianPolicy(7, [0.0, -0.4], [1.0, 0.4], (16, 16), np.random.default_rng(seed), **kw)


def test_zero_weights_give_bias_mean():
    pol = _policy()
    for p in pol.net.params:
        p[...] = 0.0
    pol.net.params[-1][...] = [0.3, -0.2]
    mean, std = pol.forward(np.ones(7))
    assert mean.tolist() == [0.3, -0.2]
    assert np.allclose(std, np.exp(pol.log_std))


def test_forward_deterministic_and_rejects_nan():
    pol = _policy()
    x = np.linspace(-1, 1, 7)
    assert np.array_equal(pol.forward(x)[0], pol.forward(x)[0])
    with pytest.raises(NonFiniteInput):
        pol.forward(np.full(7, np.nan))


def test_sample_log_prob_self_consistent():
    pol = _policy()
    rng = np.random.default_rng(7)
    for _ in range(50):
        obs = rng.normal(size=7)
        action, u, logp = pol.sample(obs, rng)
        assert abs(logp - float(pol.log_prob(obs[None], u[None])[0])) < 1e-10
        if np.all(np.abs(u) < 3):  # arctanh is well conditioned here
            assert abs(logp - float(pol.log_prob_of_action(obs[None], action[None])[0])) < 1e-8


def test_small_std_gives_squashed_mean():
    pol = _policy(log_std_init=-5.0)
    obs = np.ones(7)
    action, _, _ = pol.sample(obs, np.random.default_rng(0))
    assert np.allclose(action, pol.act_deterministic(obs), atol=1e-2)


def test_pre_squash_sample_mean():
    pol = _policy()
    obs = np.full(7, 0.2)
    mean, std = pol.forward(obs)
    rng = np.random.default_rng(8)
    n = 100_000
    us = np.array([pol.sample(obs, rng)[1] for _ in range(n)])
    assert np.all(np.abs(us.mean(axis=0) - mean) <= 3 * std / np.sqrt(n))


@settings(max_examples=50)
@given(st.lists(st.floats(-1e3, 1e3), min_size=7, max_size=7), st.integers(0, 1000))
def test_actions_within_bounds(obs, seed):
    pol = _policy(log_std_init=1.0)
    action, _, _ = pol.sample(np.array(obs), np.random.default_rng(seed))
    assert np.all(action >= pol.act_low) and np.all(action <= pol.act_high)


def test_checkpoint_roundtrip(tmp_path):
    cfg = PpoConfig(steps_per_iter=64, minibatch_size=32, hidden=(8, 8), total_steps=64)
    pol, crit, _ = train_loop(Bandit, cfg, seed=2)
    path = tmp_path / "c.json"
    save_checkpoint(path, pol, crit, {"note": 1})
    pol2, crit2, payload = load_checkpoint(path, obs_dim=2, act_dim=1)
    x = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(pol.forward(x)[0], pol2.forward(x)[0])
    assert np.array_equal(crit(x), crit2(x))
    assert payload["config"] == {"note": 1}


def test_checkpoint_mismatch(tmp_path):
    pol = GaussianPolicy(2, [-1.0], [1.0], (4,), np.random.default_rng(0))
    path = tmp_path / "c.json"
    save_checkpoint(path, pol, ValueFunction(2, (4,), np.random.default_rng(1)))
    with pytest.raises(ValueError, match="obs_dim"):
        load_checkpoint(path, obs_dim=7)
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    with pytest.raises(ValueError):
        load_checkpoint(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        PpoConfig(gamma=1.5)
    with pytest.raises(ValueError):
        PpoConfig(clip_eps=0.0)
