"""Diagonal Gaussian policy distribution.

All functions reduce over the last axis, so ``mean`` may be ``(d,)`` or a
batch ``(n, d)``. KL is always taken as ``KL(old || new)``.
"""

from dataclasses import dataclass

import numpy as np

STD_FLOOR = 1e-4
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def softplus(x):
    return np.logaddexp(0.0, x)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def std_from_raw(raw):
    return softplus(raw) + STD_FLOOR


def raw_for_std(std):
    """Inverse of ``std_from_raw``."""
    y = np.asarray(std, dtype=float) - STD_FLOOR
    return y + np.log(-np.expm1(-y))


@dataclass
class DiagGaussian:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.asarray(self.std, dtype=float)
        if not (np.all(self.std > 0) and np.all(np.isfinite(self.std))):
            raise ValueError("std must be strictly positive and finite")

    def sample(self, rng):
        z = rng.standard_normal(np.broadcast(self.mean, self.std).shape)
        return self.mean + self.std * z

    def log_prob(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return np.sum(-0.5 * z * z - np.log(self.std) - HALF_LOG_2PI, axis=-1)

    def entropy(self):
        std = np.broadcast_to(self.std, np.broadcast(self.mean, self.std).shape)
        return np.sum(0.5 + HALF_LOG_2PI + np.log(std), axis=-1)


def kl(old: DiagGaussian, new: DiagGaussian):
    var_new = new.std**2
    terms = (np.log(new.std / old.std)
             + (old.std**2 + (old.mean - new.mean) ** 2) / (2.0 * var_new) - 0.5)
    return np.sum(terms, axis=-1)


def log_prob_grads(d: DiagGaussian, x):
    """Partial derivatives of ``log_prob`` w.r.t. mean and std (elementwise)."""
    diff = np.asarray(x, dtype=float) - d.mean
    var = d.std**2
    return diff / var, diff * diff / (var * d.std) - 1.0 / d.std


def kl_grads(old: DiagGaussian, new: DiagGaussian):
    """Partial derivatives of ``kl(old, new)`` w.r.t. the NEW mean and std."""
    diff = new.mean - old.mean
    var = new.std**2
    d_mean = diff / var
    d_std = 1.0 / new.std - (old.std**2 + diff * diff) / (var * new.std)
    return d_mean, d_std
