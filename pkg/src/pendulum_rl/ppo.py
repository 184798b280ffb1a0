"""Proximal Policy Optimization: clipped surrogate and adaptive KL penalty."""

from dataclasses import dataclass

import numpy as np

from . import gaussian as G
from .buffers import BufferStateError, RolloutBuffer
from .nn import MLP, AdamState, adam_update

METHODS = ("clip", "penalty")


def clip_objective(ratio, adv, epsilon):
    """min(ratio * adv, g(epsilon, adv)) with g = (1+eps)A for A >= 0, (1-eps)A otherwise."""
    ratio = np.asarray(ratio, dtype=float)
    adv = np.asarray(adv, dtype=float)
    g = np.where(adv >= 0, (1.0 + epsilon) * adv, (1.0 - epsilon) * adv)
    return np.minimum(ratio * adv, g)


def adapt_beta(beta, mean_kl, kl_target, upper=1.5, lower=1.5, beta_min=1e-4, beta_max=10.0):
    if mean_kl >= upper * kl_target:
        beta = 2.0 * beta
    elif mean_kl <= kl_target / lower:
        beta = beta / 2.0
    return float(min(max(beta, beta_min), beta_max))


@dataclass
class PpoTrainStats:
    actor_loss: float
    critic_loss: float
    mean_kl: float
    beta_after: float


@dataclass
class PolicyBatch:
    """Frozen per-sample data the actor objective needs."""
    obs: np.ndarray
    act: np.ndarray
    adv: np.ndarray
    logp_old: np.ndarray
    mean_old: np.ndarray
    std_old: np.ndarray


class PpoAgent:
    def __init__(self, rng, obs_dim=3, act_dim=1, max_action=2.0, method="clip",
                 actor_lr=1e-4, critic_lr=2e-4, epsilon=0.2, beta=0.5, kl_target=0.01,
                 gamma=0.9, lam=0.95, epochs=20, batch_size=200, entropy_coeff=0.01,
                 normalize_adv=True, kl_upper=1.5, kl_lower=1.5, beta_min=1e-4,
                 beta_max=10.0, init_std=1.0, actor_hidden=(128, 64, 64),
                 critic_hidden=(64, 64, 64)):
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {method!r}")
        if not 0.0 < epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if not beta > 0:
            raise ValueError("beta must be positive")
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.max_action = float(max_action)
        self.method = method
        self.epsilon = epsilon
        self.beta = float(beta)
        self.kl_target = kl_target
        self.gamma = gamma
        self.lam = lam
        self.epochs = epochs
        self.batch_size = batch_size
        self.entropy_coeff = entropy_coeff
        self.normalize_adv = normalize_adv
        self.kl_upper = kl_upper
        self.kl_lower = kl_lower
        self.beta_min = beta_min
        self.beta_max = beta_max
        # init order: actor mean net, then critic
        self.actor_mean = MLP.init([obs_dim, *actor_hidden, act_dim], rng,
                                   output_activation="scaled_tanh", output_bound=max_action)
        self.log_std_raw = np.full(act_dim, float(G.raw_for_std(init_std)))
        self.critic = MLP.init([obs_dim, *critic_hidden, 1], rng)
        self.actor_opt = AdamState(lr=actor_lr)
        self.critic_opt = AdamState(lr=critic_lr)

    @property
    def actor_params(self) -> list:
        return [*self.actor_mean.params, self.log_std_raw]

    @property
    def std(self) -> np.ndarray:
        return G.std_from_raw(self.log_std_raw)

    def distribution(self, obs) -> G.DiagGaussian:
        return G.DiagGaussian(self.actor_mean(obs), self.std)

    def value(self, obs):
        return self.critic(obs)[..., 0]

    def policy(self, obs, rng):
        """Sample an unclamped action; returns ``(action, logp, value)``."""
        d = self.distribution(obs)
        a = d.sample(rng)
        return a, float(d.log_prob(a)), float(self.value(obs))

    def greedy_action(self, obs) -> np.ndarray:
        return np.clip(self.actor_mean(obs), -self.max_action, self.max_action)

    def actor_objective(self, b: PolicyBatch, with_grads=True):
        """Mean per-sample actor objective (to be maximised) and its ascent gradients.

        Returns ``(objective, mean_kl, grads)`` where ``grads`` matches
        :attr:`actor_params`.
        """
        mu, tape = self.actor_mean.forward(b.obs)
        raw = self.log_std_raw
        std = G.std_from_raw(raw)
        new = G.DiagGaussian(mu, std)
        old = G.DiagGaussian(b.mean_old, b.std_old)
        n = len(b.obs)
        logp = new.log_prob(b.act)
        ratio = np.exp(logp - b.logp_old)
        kl = G.kl(old, new)
        mean_kl = float(np.mean(kl))

        if self.method == "clip":
            surr = clip_objective(ratio, b.adv, self.epsilon)
            entropy = float(G.DiagGaussian(np.zeros_like(std), std).entropy())
            objective = float(np.mean(surr)) + self.entropy_coeff * entropy
        else:
            surr = ratio * b.adv - self.beta * kl
            objective = float(np.mean(surr))
        if not with_grads:
            return objective, mean_kl, None

        # d(objective)/d(logp_i), per sample, already divided by n
        if self.method == "clip":
            g = np.where(ratio * b.adv <= clip_objective(ratio, b.adv, self.epsilon),
                         ratio * b.adv, 0.0) / n
        else:
            g = ratio * b.adv / n
        dlogp_dmu, dlogp_dstd = G.log_prob_grads(new, b.act)
        d_mu = g[:, None] * dlogp_dmu
        d_std = np.sum(g[:, None] * dlogp_dstd, axis=0)
        if self.method == "clip":
            d_std = d_std + self.entropy_coeff / std
        else:
            dkl_dmu, dkl_dstd = G.kl_grads(old, new)
            d_mu = d_mu - (self.beta / n) * dkl_dmu
            d_std = d_std - (self.beta / n) * np.sum(dkl_dstd, axis=0)
        grads, _ = self.actor_mean.backward(tape, d_mu)
        return objective, mean_kl, [*grads, d_std * G.sigmoid(raw)]

    def critic_loss_and_grads(self, obs, ret):
        v, tape = self.critic.forward(obs)
        err = v[:, 0] - ret
        grads, _ = self.critic.backward(tape, (2.0 / len(ret)) * err[:, None])
        return float(np.mean(err**2)), grads

    def critic_loss(self, obs, ret) -> float:
        return float(np.mean((self.value(obs) - ret) ** 2))

    def snapshot_batch(self, buf: RolloutBuffer) -> PolicyBatch:
        """Freeze the current (old) policy over the whole sealed buffer."""
        n = len(buf)
        return PolicyBatch(
            obs=buf.obs[:n].copy(),
            act=buf.act[:n].copy(),
            adv=buf.advantages(self.normalize_adv),
            logp_old=buf.logp[:n].copy(),
            mean_old=self.actor_mean(buf.obs[:n]),
            std_old=np.broadcast_to(self.std, (n, self.act_dim)).copy(),
        )

    def train(self, buf: RolloutBuffer, rng) -> PpoTrainStats:
        if not buf.sealed:
            raise BufferStateError("ppo train needs a sealed rollout buffer")
        data = self.snapshot_batch(buf)
        ret = buf.ret[: len(buf)]
        actor_losses, critic_losses, kls = [], [], []
        for epoch in range(self.epochs):
            last = epoch == self.epochs - 1
            for idx in buf.get_minibatches(self.batch_size, rng):
                mb = PolicyBatch(data.obs[idx], data.act[idx], data.adv[idx],
                                 data.logp_old[idx], data.mean_old[idx], data.std_old[idx])
                objective, mean_kl, grads = self.actor_objective(mb)
                adam_update(self.actor_params, [-g for g in grads], self.actor_opt)
                c_loss, c_grads = self.critic_loss_and_grads(mb.obs, ret[idx])
                adam_update(self.critic.params, c_grads, self.critic_opt)
                if last:
                    actor_losses.append(-objective)
                    critic_losses.append(c_loss)
                    kls.append(mean_kl)
        mean_kl = float(np.mean(kls))
        if self.method == "penalty":
            self.beta = adapt_beta(self.beta, mean_kl, self.kl_target, self.kl_upper,
                                   self.kl_lower, self.beta_min, self.beta_max)
        return PpoTrainStats(float(np.mean(actor_losses)), float(np.mean(critic_losses)),
                             mean_kl, self.beta)

    def networks(self) -> dict:
        return {"actor_mean": self.actor_mean, "critic": self.critic}


def ppo_policy(agent: PpoAgent, obs, rng):
    return agent.policy(obs, rng)


def ppo_train(agent: PpoAgent, buf: RolloutBuffer, rng) -> PpoTrainStats:
    return agent.train(buf, rng)
