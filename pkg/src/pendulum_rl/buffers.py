"""Experience storage: FIFO replay for DDPG, episodic rollouts with GAE for PPO."""

from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter


class NotEnoughDataError(ValueError):
    pass


class BufferStateError(RuntimeError):
    pass


def discount_cumsum(x, gamma: float) -> np.ndarray:
    """y[t] = x[t] + gamma * y[t+1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    return lfilter([1.0], [1.0, -float(gamma)], x[::-1])[::-1]


class Transition(NamedTuple):
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    d: float


class ReplayBuffer:
    def __init__(self, capacity=20000, obs_dim=3, act_dim=1):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.s = np.zeros((capacity, obs_dim))
        self.a = np.zeros((capacity, act_dim))
        self.r = np.zeros(capacity)
        self.s_next = np.zeros((capacity, obs_dim))
        self.d = np.zeros(capacity)
        self.size = 0
        self.cursor = 0

    def __len__(self):
        return self.size

    def add(self, t: Transition) -> None:
        i = self.cursor
        self.s[i] = t.s
        self.a[i] = t.a
        self.r[i] = t.r
        self.s_next[i] = t.s_next
        self.d[i] = t.d
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _ordered_indices(self) -> np.ndarray:
        start = self.cursor - self.size
        return np.arange(start, self.cursor) % self.capacity

    def contents(self) -> list:
        """Stored transitions, oldest first."""
        return [self._get(i) for i in self._ordered_indices()]

    def _get(self, i) -> Transition:
        return Transition(self.s[i].copy(), self.a[i].copy(), float(self.r[i]),
                          self.s_next[i].copy(), float(self.d[i]))

    def sample_indices(self, batch: int, rng) -> np.ndarray:
        if self.size < batch:
            raise NotEnoughDataError(f"buffer holds {self.size} transitions, need {batch}")
        return rng.integers(0, self.size, size=batch)

    def sample(self, batch: int, rng) -> Transition:
        """Uniform draw with replacement, returned as stacked arrays."""
        idx = self.sample_indices(batch, rng)
        return Transition(self.s[idx], self.a[idx], self.r[idx], self.s_next[idx], self.d[idx])


class RolloutBuffer:
    """On-policy trajectory store.

    Call :meth:`finish_path` at the end of every episode (or when the buffer
    fills mid-episode) to compute advantages and rewards-to-go for the open
    segment. Training requires every stored step to be sealed.
    """

    def __init__(self, size=10000, obs_dim=3, act_dim=1, gamma=0.9, lam=0.95):
        self.max_size = int(size)
        self.gamma = gamma
        self.lam = lam
        self.obs = np.zeros((size, obs_dim))
        self.act = np.zeros((size, act_dim))
        self.rew = np.zeros(size)
        self.val = np.zeros(size)
        self.logp = np.zeros(size)
        self.adv = np.zeros(size)
        self.ret = np.zeros(size)
        self.ptr = 0
        self.path_start = 0

    def __len__(self):
        return self.ptr

    @property
    def full(self) -> bool:
        return self.ptr >= self.max_size

    @property
    def sealed(self) -> bool:
        return self.ptr > 0 and self.path_start == self.ptr

    def store(self, obs, act, rew, val, logp) -> None:
        if self.full:
            raise BufferStateError("rollout buffer is full")
        i = self.ptr
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.val[i] = val
        self.logp[i] = logp
        self.ptr += 1

    def finish_path(self, last_v: float = 0.0) -> None:
        if self.ptr == self.path_start:
            raise BufferStateError("no open segment to finish")
        seg = slice(self.path_start, self.ptr)
        rews = np.append(self.rew[seg], last_v)
        vals = np.append(self.val[seg], last_v)
        deltas = rews[:-1] + self.gamma * vals[1:] - vals[:-1]
        self.adv[seg] = discount_cumsum(deltas, self.gamma * self.lam)
        self.ret[seg] = discount_cumsum(rews, self.gamma)[:-1]
        self.path_start = self.ptr

    def _check_sealed(self):
        if not self.sealed:
            raise BufferStateError("buffer has unfinished segments or is empty")

    def advantages(self, normalize=True) -> np.ndarray:
        """Advantages over the whole buffer, optionally zero-mean / unit-std."""
        self._check_sealed()
        adv = self.adv[: self.ptr].copy()
        if normalize:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        return adv

    def get_minibatches(self, batch: int, rng) -> list:
        """Fresh random permutation of all indices, chunked into ``batch``-sized pieces."""
        self._check_sealed()
        perm = rng.permutation(self.ptr)
        return [perm[i:i + batch] for i in range(0, self.ptr, batch)]

    def clear(self) -> None:
        self.ptr = 0
        self.path_start = 0
