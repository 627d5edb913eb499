"""
A short PPO run
===============

Trains for a small budget, prints the learning curve every few iterations,
then compares the trained policy with the baseline on a handful of episodes.
A full desk-scale run is ``lfrl train --seeds 3 --steps 200000``.
"""

import numpy as np

from lfrl.config import RunConfig
from lfrl.env import DrivingEnv
from lfrl.harness import evaluate
from lfrl.ppo.trainer import train_loop

cfg = RunConfig().with_(ppo={"total_steps": 40_960})
env_cfg, track = cfg.env_config("ou"), cfg.build_track()

policy, critic, records = train_loop(lambda: DrivingEnv(env_cfg, track), cfg.ppo, seed=0)
print("iter   steps   mean episode reward")
for rec in records[::4]:
    print(f"{rec['iter']:4d}  {rec['steps']:6d}   {rec['mean_ep_reward']:9.2f}")

for name, pol in (("DRL", policy), ("baseline", None)):
    agent = "drl" if pol is not None else "baseline"
    report, results = evaluate(cfg, agent, "ou", pol, episodes=3, seed0=1000)
    returns = np.array([r.return_ for r in results])
    ends = [r.record.termination for r in results]
    print(f"{name:9s} mean return {returns.mean():8.1f}  terminations {ends}")
