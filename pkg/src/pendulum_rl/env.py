"""Inverted pendulum swing-up simulation.

Observation is ``[cos(theta), sin(theta), theta_dot]`` with ``theta = 0``
upright. Reward penalises angle, speed and effort and lies in
``[-16.2736044, 0]``.
"""

from dataclasses import dataclass

import numpy as np

REWARD_MIN = -(np.pi**2 + 0.1 * 8.0**2 + 0.001 * 2.0**2)


def angle_normalize(theta: float) -> float:
    """Map an angle onto the principal range ``[-pi, pi)``."""
    return ((theta + np.pi) % (2 * np.pi)) - np.pi


@dataclass(frozen=True)
class EnvParams:
    gravity: float = 10.0
    mass: float = 1.0
    length: float = 1.0
    dt: float = 0.05
    max_torque: float = 2.0
    max_speed: float = 8.0
    episode_len: int = 200

    def __post_init__(self):
        for name in ("gravity", "mass", "length", "dt", "max_torque", "max_speed"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.episode_len < 1:
            raise ValueError("episode_len must be >= 1")


@dataclass
class PendulumState:
    theta: float
    theta_dot: float
    step_count: int = 0


class EpisodeFinishedError(RuntimeError):
    """Raised when stepping an environment whose episode has ended."""


class PendulumEnv:
    def __init__(self, params: EnvParams | None = None):
        self.params = params or EnvParams()
        self.state: PendulumState | None = None

    def reset(self, rng) -> np.ndarray:
        # draw order: theta, then theta_dot
        theta = float(rng.uniform(-np.pi, np.pi))
        theta_dot = float(rng.uniform(-1.0, 1.0))
        return self.reset_to(theta, theta_dot)

    def reset_to(self, theta: float, theta_dot: float) -> np.ndarray:
        """Start an episode from an explicit state."""
        speed = self.params.max_speed
        self.state = PendulumState(
            angle_normalize(float(theta)), float(np.clip(theta_dot, -speed, speed)), 0
        )
        return self.observation()

    def observation(self) -> np.ndarray:
        s = self.state
        return np.array([np.cos(s.theta), np.sin(s.theta), s.theta_dot])

    @property
    def done(self) -> bool:
        return self.state is not None and self.state.step_count >= self.params.episode_len

    def step(self, action) -> tuple[np.ndarray, float, bool]:
        if self.state is None:
            raise EpisodeFinishedError("environment must be reset before step()")
        if self.done:
            raise EpisodeFinishedError("episode finished; call reset()")
        a = float(np.asarray(action, dtype=float).reshape(-1)[0])
        if not np.isfinite(a):
            raise ValueError(f"action must be finite, got {a}")

        p = self.params
        s = self.state
        u = min(max(a, -p.max_torque), p.max_torque)
        th = angle_normalize(s.theta)
        reward = -(th**2 + 0.1 * s.theta_dot**2 + 0.001 * u**2)

        acc = 3.0 * p.gravity / (2.0 * p.length) * np.sin(s.theta) + 3.0 / (p.mass * p.length**2) * u
        new_dot = min(max(s.theta_dot + acc * p.dt, -p.max_speed), p.max_speed)
        new_theta = angle_normalize(s.theta + new_dot * p.dt)
        self.state = PendulumState(float(new_theta), float(new_dot), s.step_count + 1)
        return self.observation(), float(reward), self.done
