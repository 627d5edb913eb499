"""
IDM + PD baseline behind a random leader
========================================

Runs the rule-based follower behind an Ornstein-Uhlenbeck leader, prints a
few seconds of the speed trace, and the aggregated safety metrics.
"""

import numpy as np

from lfrl.config import RunConfig
from lfrl.harness import baseline_actor, run_episodes
from lfrl.metrics import aggregate_runs, format_table

cfg = RunConfig()
results = run_episodes(cfg, baseline_actor(cfg), "ou", n=3, seed0=1000)

rec = results[0].record
print("  t [s]   gap [m]   v_ego [m/s]")
for i in range(0, 400, 40):
    print(f"{rec.t[i]:7.2f}   {rec.gap[i]:7.3f}   {rec.v_ego[i]:11.3f}")

for r in results:
    print(f"seed {r.seed}: {r.record.termination}, return {r.return_:.1f}")

report = aggregate_runs([r.record for r in results], cfg.vehicle.body_length, cfg.env.t_cap)
print()
print(format_table({"IDM+PD": report}))

# the IDM steady state the follower settles toward at the leader's mean speed
v = cfg.ou.mu
gap = (cfg.idm.g_min + v * cfg.idm.T) / np.sqrt(1 - (v / cfg.idm.v_des) ** 4)
print(f"equilibrium gap at {v} m/s: {gap:.3f} m")
