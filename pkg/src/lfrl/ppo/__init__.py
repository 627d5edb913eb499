"""From-scratch PPO-Clip in numpy."""

from .adam import Adam, clip_grad_norm
from .buffer import RolloutBuffer, advantages, normalize, rewards_to_go
from .nn import MLP
from .policy import (
    GaussianPolicy,
    ValueFunction,
    gaussian_log_prob,
    ppo_clip_objective,
    ppo_clip_objective_grad,
    value_loss,
    value_loss_grad,
)
from .trainer import PpoConfig, collect_rollout, load_checkpoint, save_checkpoint, train_loop, update
