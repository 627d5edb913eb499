"""Leader-following lane-keeping simulator with a numpy PPO-Clip agent.

Modules
-------
track, vehicle, env
    Closed-loop track geometry, kinematic bicycle, episode lifecycle.
perception
    Affordance emulator (lane offset, heading offset, pinhole pattern size).
controllers
    IDM, PD steering, Ornstein-Uhlenbeck and scripted leader speeds.
reward
    Safety / efficiency / lateral / heading reward terms.
ppo
    Actor-critic networks, GAE, clipped surrogate, Adam, training loop.
metrics
    TTC and headway statistics, deviation integrals, survival time.
harness
    Config handling, train/eval/plot-data commands (also ``python -m lfrl``).
"""

from .controllers import IdmParams, OuParams, PdParams, idm_accel, ou_step, pd_steer, scripted_profile
from .env import DrivingEnv, EnvConfig, WorldState, bumper_gap, check_termination, reset_episode
from .track import Arc, Straight, TrackGeometry, build_track, project_to_lane
from .vehicle import Action, VehicleParams, VehicleState, step_vehicle

__version__ = "0.1.0"
