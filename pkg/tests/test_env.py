import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfrl.env import (
    COLLISION,
    LOG_HEADER,
    NONE,
    OFF_ROAD,
    TIME_CAP,
    DrivingEnv,
    EnvConfig,
    WorldState,
    bumper_gap,
    check_termination,
    place_on_center,
    reset_episode,
)
from lfrl.errors import LeaderBehind
from lfrl.track import Arc, Straight, build_track
from lfrl.vehicle import VehicleParams, VehicleState

P = VehicleParams()


def stadium(origin=(0.0, 0.0, 0.0)):
    return build_track([Straight(2.0), Arc(0.5, math.pi), Straight(2.0), Arc(0.5, math.pi)], origin=origin)


def test_gap_on_straight():
    tr = stadium()
    w = WorldState(place_on_center(tr, 0.2), place_on_center(tr, 1.2))
    assert bumper_gap(w, P, P, tr) == pytest.approx(0.82)


def test_gap_touching_is_zero_and_collision():
    tr = stadium()
    w = WorldState(place_on_center(tr, 0.2), place_on_center(tr, 0.38))
    assert bumper_gap(w, P, P, tr) == pytest.approx(0.0, abs=1e-12)
    assert check_termination(w, tr, 50.0) == COLLISION


def test_gap_wraps_half_lap():
    tr = stadium()
    s_e = tr.arclength - 0.5
    w = WorldState(place_on_center(tr, s_e), place_on_center(tr, s_e + tr.arclength / 2))
    assert bumper_gap(w, P, P, tr) == pytest.approx(tr.arclength / 2 - 0.18, abs=1e-9)


def test_leader_behind_raises():
    tr = stadium()
    w = WorldState(place_on_center(tr, 1.0), place_on_center(tr, 0.5))
    with pytest.raises(LeaderBehind):
        bumper_gap(w, P, P, tr)


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-math.pi, math.pi), st.floats(0, 1), st.floats(0.2, 3.0))
def test_gap_invariant_under_rigid_motion(ox, oy, oh, frac, d):
    ref, moved = stadium(), stadium((ox, oy, oh))
    s = frac * ref.arclength
    gaps = []
    for tr in (ref, moved):
        w = WorldState(place_on_center(tr, s), place_on_center(tr, s + d))
        gaps.append(bumper_gap(w, P, P, tr))
    assert gaps[0] == pytest.approx(gaps[1], abs=1e-7)


def test_reset_gap_range_and_mean():
    tr = build_track()
    cfg = EnvConfig()
    rng = np.random.default_rng(0)
    gaps = []
    for _ in range(10_000):
        w = reset_episode(cfg, tr, rng)
        g = bumper_gap(w, cfg.ego, cfg.lead, tr)
        assert 0.0 <= g <= 2.0 + 1e-9
        assert w.ego.v == 0.0 and w.leader.v == 0.0 and w.t == 0.0
        gaps.append(g)
    assert np.mean(gaps) == pytest.approx(1.0, abs=0.02)


def test_reset_deterministic():
    tr = build_track()
    a = reset_episode(EnvConfig(), tr, np.random.default_rng(5))
    b = reset_episode(EnvConfig(), tr, np.random.default_rng(5))
    assert a == b


def test_termination_cases():
    tr = build_track()
    ego = place_on_center(tr, 1.0)
    w = WorldState(ego, place_on_center(tr, 2.0), t=10.0)
    assert check_termination(w, tr, 50.0) == NONE
    w.t = 50.0
    assert check_termination(w, tr, 50.0) == TIME_CAP
    x, y, h = tr.pose_at(1.0)
    off = WorldState(VehicleState(x, y + 0.5, h, 0.0), None)
    assert check_termination(off, tr, 50.0) == OFF_ROAD


def _drive(env, seed, steps=200):
    obs = env.reset(seed)
    out = [obs]
    for _ in range(steps):
        obs, r, te, tr, info = env.step(np.array([0.3, 0.0]))
        out.append(np.append(obs, r))
        if te or tr:
            break
    return np.concatenate(out)


def test_env_deterministic():
    a = _drive(DrivingEnv(), 11)
    b = _drive(DrivingEnv(), 11)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, _drive(DrivingEnv(), 12))


def test_env_step_contract():
    env = DrivingEnv()
    obs = env.reset(3)
    assert obs.shape == (7,) and np.all(np.isfinite(obs))
    obs, r, te, tr, info = env.step(np.array([0.2, 0.0]))
    b = info["breakdown"]
    assert b.total == pytest.approx(0.3 * b.r_safe + 0.2 * b.r_eff + 0.8 * b.r_lat + 0.5 * b.r_orient, abs=1e-15)
    assert len(env.log_row(b)) == len(LOG_HEADER)
    assert LOG_HEADER[:13] == ["t", "ego_x", "ego_y", "ego_psi", "ego_v", "lead_x", "lead_y", "lead_psi",
                               "lead_v", "gap", "d_delta", "theta_delta", "reward_total"]


def test_step_after_end_raises():
    env = DrivingEnv(EnvConfig(t_cap=0.1))
    env.reset(0)
    done = False
    while not done:
        *_, te, tr, _info = env.step(np.array([0.0, 0.0]))
        done = te or tr
    with pytest.raises(RuntimeError):
        env.step(np.array([0.0, 0.0]))


def test_terminal_penalty_only_on_failure():
    env = DrivingEnv(EnvConfig(leader="none"))
    env.reset(0)
    # full left lock drives off the lane quickly
    for _ in range(400):
        _, r, te, tr, info = env.step(np.array([1.0, 0.4]))
        if te or tr:
            break
    assert info["reason"] == OFF_ROAD
    assert r == pytest.approx(info["breakdown"].total + EnvConfig().terminal_penalty)


def test_time_cap_reached_by_stationary_ego():
    env = DrivingEnv(EnvConfig(leader="none", t_cap=1.0))
    env.reset(0)
    n = 0
    while True:
        *_, te, tr, info = env.step(np.array([0.0, 0.0]))
        n += 1
        if te or tr:
            break
    assert info["reason"] == TIME_CAP and tr and not te
    assert n == 20


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_observations_finite(seed):
    env = DrivingEnv()
    rng = np.random.default_rng(seed)
    obs = env.reset(seed)
    for _ in range(100):
        assert np.all(np.isfinite(obs))
        obs, _, te, tr, _ = env.step(rng.uniform(env.action_low, env.action_high))
        if te or tr:
            break
