"""Composite driving reward: safety, efficiency, lateral and heading terms.

``None`` stands for an absent quantity (no closing speed, ego standing still,
no leader); absent TTC/headway contribute zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ZeroGap

EPS_V = 1e-3


@dataclass(frozen=True)
class RewardParams:
    ttc_bound: float = 1.5
    headway_mu: float = 0.4226
    headway_delta: float = 0.4365
    a_lat: float = 2.0
    k_rc: float = 10.0
    w_s: float = 0.3
    w_e: float = 0.2
    w_lat: float = 0.8
    w_orient: float = 0.5
    r_safe_floor: float = -10.0

    def __post_init__(self):
        if not (self.ttc_bound > 0 and self.headway_delta > 0 and self.a_lat > 1 and self.k_rc > 0):
            raise ValueError("invalid reward parameters")
        if min(self.w_s, self.w_e, self.w_lat, self.w_orient) < 0:
            raise ValueError("reward weights must be non-negative")


@dataclass(frozen=True)
class RewardBreakdown:
    r_safe: float
    r_eff: float
    r_lat: float
    r_orient: float
    total: float


def ttc(gap: float, dv: float) -> float | None:
    """Time to collision, or ``None`` when the gap is not closing."""
    if not gap > 0:
        raise ZeroGap(f"TTC needs a positive gap, got {gap}")
    return gap / dv if dv > 0 else None


def headway(gap: float, l_leader: float, v_ego: float) -> float | None:
    return (gap + l_leader) / v_ego if v_ego > EPS_V else None


def r_safe(ttc_value: float | None, params: RewardParams = RewardParams()) -> float:
    if ttc_value is None or not 0 < ttc_value <= params.ttc_bound:
        # ttc == 0 is a contact; treat as the floor rather than log(0)
        return params.r_safe_floor if ttc_value == 0 else 0.0
    return max(math.log(ttc_value / params.ttc_bound), params.r_safe_floor)


def r_eff(h: float | None, params: RewardParams = RewardParams()) -> float:
    """Log-normal density of the time headway."""
    if h is None or not h > 0:
        return 0.0
    dl = params.headway_delta
    z = (math.log(h) - params.headway_mu) / dl
    return math.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * h * dl)


def r_lat(e_y: float, params: RewardParams = RewardParams()) -> float:
    return -(params.a_lat ** (params.k_rc * e_y) - 1.0)


def r_orient(chi_yaw: float) -> float:
    return -abs(chi_yaw)


def total_reward(
    gap: float | None,
    dv: float,
    v_ego: float,
    l_leader: float,
    e_y: float,
    chi_yaw: float,
    params: RewardParams = RewardParams(),
) -> RewardBreakdown:
    """Weighted reward from ground truth.

    ``gap=None`` means no leader.  A gap of zero (contact) yields the clamped
    safety floor.
    """
    if gap is None:
        rs = re = 0.0
    else:
        rs = params.r_safe_floor if gap <= 0 else r_safe(ttc(gap, dv), params)
        re = r_eff(headway(max(gap, 0.0), l_leader, v_ego), params)
    rl = r_lat(e_y, params)
    ro = r_orient(chi_yaw)
    total = params.w_s * rs + params.w_e * re + params.w_lat * rl + params.w_orient * ro
    return RewardBreakdown(rs, re, rl, ro, total)


def reward_from_measures(ttc_value, h, e_y, chi_yaw, params: RewardParams = RewardParams()) -> RewardBreakdown:
    """Breakdown directly from TTC/headway values (``None`` for absent)."""
    rs, re = r_safe(ttc_value, params), r_eff(h, params)
    rl, ro = r_lat(e_y, params), r_orient(chi_yaw)
    total = params.w_s * rs + params.w_e * re + params.w_lat * rl + params.w_orient * ro
    return RewardBreakdown(rs, re, rl, ro, total)
