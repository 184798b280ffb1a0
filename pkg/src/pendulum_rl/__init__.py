"""DDPG and PPO for the inverted pendulum, on a small numpy neural-network core."""

from .buffers import ReplayBuffer, RolloutBuffer, Transition, discount_cumsum
from .config import TrainConfig, load_config
from .ddpg import DdpgAgent, OUNoise, polyak_update
from .env import EnvParams, PendulumEnv, angle_normalize
from .gaussian import DiagGaussian, kl
from .nn import MLP, AdamState, adam_update
from .ppo import PpoAgent, adapt_beta, clip_objective
from .train import RunLog, run_ddpg, run_ppo, write_log

__version__ = "0.1.0"
