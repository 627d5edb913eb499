import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfrl.env import place_on_center
from lfrl.perception import (
    Affordances,
    DelayBuffer,
    PerceptionConfig,
    build_observation,
    delay_stream,
    observe_lane,
    observe_leader,
    pattern_depth,
    pinhole_ds,
)
from lfrl.track import build_track, project_to_lane
from lfrl.vehicle import VehicleParams, VehicleState

P = VehicleParams()
IDEAL = PerceptionConfig.ideal()


def leader_at(z, bearing=0.0):
    """Ego at the origin facing +x; leader pattern at camera depth z."""
    ego = VehicleState(0.0, 0.0, 0.0, 0.0)
    cam = 0.5 * P.body_length
    px, py = cam + z, z * math.tan(bearing)
    return ego, VehicleState(px + 0.5 * P.body_length, py, 0.0, 0.0)


def test_zero_noise_lane_is_ground_truth():
    tr = build_track()
    x, y, h = tr.pose_at(2.0)
    ego = VehicleState(x - 0.05 * math.sin(h), y + 0.05 * math.cos(h), h, 0.0)
    d, th = observe_lane(ego, tr, IDEAL, np.random.default_rng(0))
    truth = project_to_lane(tr, ego.x, ego.y, ego.psi)
    assert d == truth.d_delta == pytest.approx(0.05)
    assert th == truth.theta_delta


def test_lane_noise_std():
    tr = build_track()
    ego = place_on_center(tr, 1.0)
    cfg = PerceptionConfig()
    rng = np.random.default_rng(1)
    samples = np.array([observe_lane(ego, tr, cfg, rng) for _ in range(10_000)])
    assert samples[:, 0].std() == pytest.approx(cfg.noise_std_d, rel=0.05)
    assert samples[:, 1].std() == pytest.approx(cfg.noise_std_theta, rel=0.05)


def test_pinhole_value():
    assert pinhole_ds(0.5, PerceptionConfig(focal_px=300, circle_spacing=0.05)) == pytest.approx(30.0)


def test_depth_doubling_halves_ds():
    rng = np.random.default_rng(0)
    a = observe_leader(*leader_at(0.4), P, P, IDEAL, rng)
    b = observe_leader(*leader_at(0.8), P, P, IDEAL, rng)
    assert a == pytest.approx(2 * b)
    assert a == pytest.approx(300 * 0.05 / 0.4)


def test_pattern_depth_straight_ahead():
    z, bearing = pattern_depth(*leader_at(0.7), P, P)
    assert z == pytest.approx(0.7) and bearing == pytest.approx(0.0, abs=1e-12)


def test_outside_fov_absent():
    cfg = PerceptionConfig.ideal(fov_half_angle=0.5)
    assert observe_leader(*leader_at(0.5, bearing=0.6), P, P, cfg, np.random.default_rng(0)) is None
    assert observe_leader(*leader_at(0.5, bearing=0.4), P, P, cfg, np.random.default_rng(0)) is not None


def test_beyond_range_and_no_leader_absent():
    rng = np.random.default_rng(0)
    assert observe_leader(*leader_at(IDEAL.max_range + 0.1), P, P, IDEAL, rng) is None
    assert observe_leader(VehicleState(0, 0, 0, 0), None, P, P, IDEAL, rng) is None


def test_dropout_rate_binomial_bound():
    p = 0.1
    cfg = PerceptionConfig.ideal(dropout_prob=p)
    rng = np.random.default_rng(2)
    ego, lead = leader_at(0.5)
    n = 10_000
    absent = sum(observe_leader(ego, lead, P, P, cfg, rng) is None for _ in range(n))
    sigma = math.sqrt(n * p * (1 - p))
    assert abs(absent - n * p) <= 3 * sigma


@given(st.floats(0.03, 2.9), st.floats(0.03, 2.9))
def test_ds_monotone_in_depth(z1, z2):
    if z1 == z2:
        return
    rng = np.random.default_rng(0)
    d1 = observe_leader(*leader_at(z1), P, P, IDEAL, rng)
    d2 = observe_leader(*leader_at(z2), P, P, IDEAL, rng)
    assert (d1 > d2) == (z1 < z2)


def test_observation_components():
    now = Affordances(0.11, math.pi / 2, 30.0)
    prev = Affordances(0.0, 0.0, 25.0)
    obs = build_observation(now, prev, 0.4, (0.5, -0.1), 0.22)
    assert obs.shape == (7,)
    assert obs[0] == pytest.approx(0.5)
    assert obs[1] == pytest.approx(0.5)
    assert obs[2] == 0.4
    assert obs[3] == pytest.approx(0.30) and obs[4] == pytest.approx(0.25)
    assert tuple(obs[5:]) == (0.5, -0.1)


def test_absent_leader_sentinel():
    a = Affordances(0.0, 0.0, None)
    obs = build_observation(a, a, 0.0, (0.0, 0.0), 0.22)
    assert obs[3] == 0.0 and obs[4] == 0.0


def test_delay_identity_and_shift():
    assert delay_stream(list("ABCD"), 0) == list("ABCD")
    assert delay_stream(list("ABCD"), 2) == list("AAAB")


@given(st.lists(st.integers(0, 9), min_size=1, max_size=8))
def test_delay_composition(items):
    assert delay_stream(delay_stream(items, 1), 1) == delay_stream(items, 2)


def test_delay_buffer_reset():
    buf = DelayBuffer(1)
    assert buf.push(1) == 1
    assert buf.push(2) == 1
    buf.reset()
    assert buf.push(7) == 7


def test_config_validation():
    with pytest.raises(ValueError):
        PerceptionConfig(focal_px=0)
    with pytest.raises(ValueError):
        PerceptionConfig(dropout_prob=1.5)
