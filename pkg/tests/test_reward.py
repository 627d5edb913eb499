import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfrl.errors import ZeroGap
from lfrl.reward import (
    RewardParams,
    headway,
    r_eff,
    r_lat,
    r_orient,
    r_safe,
    reward_from_measures,
    total_reward,
    ttc,
)

RP = RewardParams()


def lognormal_pdf(h, mu, sd):
    # written out independently of the module
    return 1.0 / (h * sd * math.sqrt(2 * math.pi)) * math.exp(-((math.log(h) - mu) ** 2) / (2 * sd * sd))


def test_paper_constants():
    assert (RP.ttc_bound, RP.headway_mu, RP.headway_delta) == (1.5, 0.4226, 0.4365)
    assert (RP.w_s, RP.w_e, RP.w_lat, RP.w_orient) == (0.3, 0.2, 0.8, 0.5)


def test_ttc_values():
    assert ttc(1.0, 0.5) == 2.0
    assert ttc(0.75, 0.5) == 1.5
    assert ttc(1.0, -0.1) is None
    assert ttc(1.0, 0.0) is None
    with pytest.raises(ZeroGap):
        ttc(0.0, 0.5)


def test_headway_values():
    assert headway(0.82, 0.18, 1.0) == pytest.approx(1.0)
    assert headway(1.08, 0.18, 1.0) == pytest.approx(1.26)
    assert headway(1.0, 0.18, 0.0) is None
    assert headway(1.0, 0.18, 1e-3) is None


def test_r_safe_values():
    assert r_safe(1.5) == 0.0
    assert r_safe(1.5 / math.e) == pytest.approx(-1.0, abs=1e-12)
    assert r_safe(3.0) == 0.0
    assert r_safe(None) == 0.0
    assert r_safe(1e-12) == RP.r_safe_floor
    assert r_safe(0.0) == RP.r_safe_floor


def test_r_eff_values():
    assert r_eff(1.2612) == pytest.approx(lognormal_pdf(1.2612, 0.4226, 0.4365), abs=1e-12)
    assert r_eff(1.2612) == pytest.approx(0.6589, abs=1e-4)
    assert r_eff(1.0) == pytest.approx(0.5719, abs=1e-4)
    assert r_eff(None) == 0.0


def test_r_eff_mode():
    assert math.exp(RP.headway_mu - RP.headway_delta**2) == pytest.approx(1.2612, abs=1e-4)
    hs = [i * 1e-4 for i in range(1, 100_001)]
    best = max(hs, key=r_eff)
    assert best == pytest.approx(1.2612, abs=1e-3)


def test_r_lat_values():
    assert r_lat(0.0) == 0.0
    assert r_lat(0.1) == pytest.approx(-1.0)


def test_r_orient_values():
    assert r_orient(0.0) == 0.0
    assert r_orient(0.2) == -0.2
    assert r_orient(-0.2) == -0.2


def test_total_examples():
    assert reward_from_measures(None, 1.2612, 0.0, 0.0).total == pytest.approx(0.1318, abs=1e-4)
    assert total_reward(None, 0.0, 0.5, 0.18, 0.0, 0.0).total == 0.0
    assert reward_from_measures(1.5 / math.e, 1.0, 0.0, 0.0).total == pytest.approx(-0.1856, abs=1e-4)


def test_total_contact_uses_floor():
    b = total_reward(0.0, 0.2, 0.3, 0.18, 0.0, 0.0)
    assert b.r_safe == RP.r_safe_floor


@given(
    st.one_of(st.none(), st.floats(0.0, 20.0)),
    st.floats(-1, 1),
    st.floats(0, 1),
    st.floats(0, 0.5),
    st.floats(-math.pi, math.pi),
)
def test_decomposition_and_signs(gap, dv, v, e_y, chi):
    b = total_reward(gap, dv, v, 0.18, e_y, chi)
    assert b.total == RP.w_s * b.r_safe + RP.w_e * b.r_eff + RP.w_lat * b.r_lat + RP.w_orient * b.r_orient
    assert RP.r_safe_floor <= b.r_safe <= 0.0
    assert b.r_eff >= 0.0 and b.r_lat <= 0.0 and b.r_orient <= 0.0


@given(st.floats(0, 1), st.floats(0, 1))
def test_r_lat_strictly_decreasing(a, b):
    if b - a > 1e-9:  # below float resolution 2**(10e) rounds to 1
        assert r_lat(a) > r_lat(b)


def test_r_safe_continuous_at_bound():
    assert r_safe(1.5 - 1e-12) == pytest.approx(0.0, abs=1e-11)
    assert r_safe(1.5 + 1e-12) == 0.0


def test_params_validation():
    with pytest.raises(ValueError):
        RewardParams(a_lat=1.0)
    with pytest.raises(ValueError):
        RewardParams(headway_delta=0.0)
