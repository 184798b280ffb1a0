"""Deep Deterministic Policy Gradient agent."""

import numpy as np

from .buffers import ReplayBuffer, Transition
from .nn import MLP, AdamState, ShapeError, adam_update


def polyak_update(target: MLP, main: MLP, tau: float) -> None:
    """Blend ``target`` toward ``main``: ``target <- (1 - tau) * target + tau * main``."""
    if target.layer_dims != main.layer_dims:
        raise ShapeError(f"target dims {target.layer_dims} != main dims {main.layer_dims}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    keep = 1.0 - tau
    for t, m in zip(target.params, main.params):
        t[...] = keep * t + tau * m


class OUNoise:
    """Ornstein-Uhlenbeck process, Euler-Maruyama discretised."""

    def __init__(self, size=1, theta=0.15, sigma=0.4, dt=0.01, mean=0.0):
        self.size = size
        self.theta = theta
        self.sigma = sigma
        self.dt = dt
        self.mean = mean
        self.state = np.zeros(size)

    def reset(self):
        self.state = np.zeros(self.size)

    def __call__(self, rng) -> np.ndarray:
        z = rng.standard_normal(self.size)
        self.state = (self.state + self.theta * (self.mean - self.state) * self.dt
                      + self.sigma * np.sqrt(self.dt) * z)
        return self.state.copy()


def ou_step(noise: OUNoise, rng) -> np.ndarray:
    return noise(rng)


class GaussianNoise:
    def __init__(self, size=1, sigma=0.2):
        self.size = size
        self.sigma = sigma

    def reset(self):
        pass

    def __call__(self, rng) -> np.ndarray:
        return self.sigma * rng.standard_normal(self.size)


class DdpgAgent:
    def __init__(self, rng, obs_dim=3, act_dim=1, max_action=2.0, actor_lr=1e-3,
                 critic_lr=2e-3, gamma=0.99, tau=0.005, noise="ou", ou_theta=0.15,
                 ou_sigma=None, ou_dt=0.01, gauss_sigma=None, actor_hidden=(128, 64, 64),
                 critic_hidden=(64, 64, 64), final_layer_range=3e-3):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.max_action = float(max_action)
        self.gamma = gamma
        self.tau = tau
        # init order: actor, then critic
        self.actor = MLP.init([obs_dim, *actor_hidden, act_dim], rng,
                              output_activation="scaled_tanh", output_bound=max_action,
                              final_layer_range=final_layer_range)
        self.critic = MLP.init([obs_dim + act_dim, *critic_hidden, 1], rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = AdamState(lr=actor_lr)
        self.critic_opt = AdamState(lr=critic_lr)
        if noise == "ou":
            sigma = 0.2 * max_action if ou_sigma is None else ou_sigma
            self.noise = OUNoise(act_dim, theta=ou_theta, sigma=sigma, dt=ou_dt)
        elif noise == "gaussian":
            sigma = 0.1 * max_action if gauss_sigma is None else gauss_sigma
            self.noise = GaussianNoise(act_dim, sigma=sigma)
        else:
            raise ValueError(f"unknown noise kind {noise!r}")

    def policy(self, obs, explore: bool, rng=None) -> np.ndarray:
        a = self.actor(obs)
        if explore:
            a = a + self.noise(rng)
        return np.clip(a, -self.max_action, self.max_action)

    def q_value(self, critic: MLP, s, a) -> np.ndarray:
        return critic(np.concatenate([s, a], axis=-1))[..., 0]

    def compute_target(self, batch: Transition) -> np.ndarray:
        a_next = self.actor_target(batch.s_next)
        q_next = self.q_value(self.critic_target, batch.s_next, a_next)
        return batch.r + self.gamma * (1.0 - batch.d) * q_next

    def critic_loss(self, s, a, y) -> float:
        return float(np.mean((self.q_value(self.critic, s, a) - y) ** 2))

    def actor_objective(self, s) -> float:
        return float(np.mean(self.q_value(self.critic, s, self.actor(s))))

    def critic_step(self, s, a, y) -> float:
        """One descent step on the mean squared Bellman error; returns the pre-step loss."""
        q, tape = self.critic.forward(np.concatenate([s, a], axis=-1))
        err = q[:, 0] - y
        grads, _ = self.critic.backward(tape, (2.0 / len(y)) * err[:, None])
        adam_update(self.critic.params, grads, self.critic_opt)
        return float(np.mean(err**2))

    def actor_grads(self, s):
        """Ascent gradient of mean Q(s, mu(s)) w.r.t. actor parameters, critic held fixed."""
        mu, a_tape = self.actor.forward(s)
        q, c_tape = self.critic.forward(np.concatenate([s, mu], axis=-1))
        n = len(s)
        _, dq_dinput = self.critic.backward(c_tape, np.full((n, 1), 1.0 / n))
        grads, _ = self.actor.backward(a_tape, dq_dinput[:, self.obs_dim:])
        return grads, float(np.mean(q))

    def actor_step(self, s) -> float:
        grads, objective = self.actor_grads(s)
        adam_update(self.actor.params, [-g for g in grads], self.actor_opt)
        return objective

    def train_step(self, buf: ReplayBuffer, batch: int, rng) -> tuple[float, float]:
        sample = buf.sample(batch, rng)
        y = self.compute_target(sample)
        critic_loss = self.critic_step(sample.s, sample.a, y)
        actor_obj = self.actor_step(sample.s)
        polyak_update(self.actor_target, self.actor, self.tau)
        polyak_update(self.critic_target, self.critic, self.tau)
        return critic_loss, actor_obj

    def networks(self) -> dict:
        return {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}


def ddpg_policy(agent: DdpgAgent, obs, explore: bool, rng=None) -> np.ndarray:
    return agent.policy(obs, explore, rng)


def ddpg_train_step(agent: DdpgAgent, buf: ReplayBuffer, batch: int, rng):
    return agent.train_step(buf, batch, rng)
