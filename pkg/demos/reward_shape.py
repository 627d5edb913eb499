"""
Shape of the composite reward
=============================

Tabulates each reward term over the quantity it depends on, then the total
for a few representative car-following situations.
"""

import math

import numpy as np

from lfrl.reward import RewardParams, r_eff, r_lat, r_orient, r_safe, reward_from_measures

p = RewardParams()

# efficiency: a log-normal bump over time headway, peaked near 1.26 s
hs = np.linspace(0.25, 5.0, 20)
print("headway [s]   r_eff")
for h in hs:
    print(f"{h:10.2f}   {r_eff(h):.4f}")
print("peak at", round(math.exp(p.headway_mu - p.headway_delta**2), 4), "s")

# safety: zero above the TTC bound, logarithmic below, clamped at the floor
print("\nTTC [s]   r_safe")
for ttc in (0.01, 0.1, 0.5, 1.0, 1.5, 3.0):
    print(f"{ttc:7.2f}   {r_safe(ttc):8.4f}")

# lane keeping: exponential in cross-track error, linear in heading error
print("\ne_y [m]   r_lat      chi [rad]   r_orient")
for e, chi in zip((0.0, 0.02, 0.05, 0.1), (0.0, 0.1, 0.3, 0.6)):
    print(f"{e:7.2f}   {r_lat(e) + 0.0:8.4f}   {chi:9.2f}   {r_orient(chi) + 0.0:8.4f}")

print("\nsituation                               total")
for name, ttc, h, e, chi in [
    ("ideal following", None, 1.2612, 0.0, 0.0),
    ("too far behind", None, 4.5, 0.0, 0.0),
    ("closing fast", 0.8, 1.0, 0.0, 0.0),
    ("good headway, drifting out of lane", None, 1.2612, 0.08, 0.2),
]:
    print(f"{name:38s}  {reward_from_measures(ttc, h, e, chi).total:7.4f}")
