import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pendulum_rl.env import (REWARD_MIN, EnvParams, EpisodeFinishedError, PendulumEnv,
                             angle_normalize)


class FixedDraws:
    """Stands in for a Generator, returning preset uniform draws in order."""

    def __init__(self, *values):
        self.values = list(values)

    def uniform(self, low, high):
        return self.values.pop(0)


def test_reward_min_constant():
    assert REWARD_MIN == pytest.approx(-16.2736044, abs=1e-7)


@pytest.mark.parametrize("theta, expected", [
    (0.0, 0.0),
    (2 * math.pi, 0.0),
    (3.5 * math.pi, -0.5 * math.pi),
])
def test_angle_normalize_examples(theta, expected):
    assert abs(angle_normalize(theta) - expected) < 1e-12


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_angle_normalize_range_and_congruence(theta):
    out = angle_normalize(theta)
    assert -math.pi <= out <= math.pi
    k = (theta - out) / (2 * math.pi)
    assert abs(k - round(k)) < 1e-9


def test_reset_forced_upright():
    env = PendulumEnv()
    obs = env.reset(FixedDraws(0.0, 0.0))
    np.testing.assert_array_equal(obs, [1.0, 0.0, 0.0])
    assert env.state.step_count == 0


def test_reset_forced_hanging():
    obs = PendulumEnv().reset(FixedDraws(math.pi, 0.0))
    np.testing.assert_allclose(obs, [-1.0, 0.0, 0.0], atol=1e-12)


def test_reset_invariants_over_seeded_resets():
    env = PendulumEnv()
    rng = np.random.default_rng(123)
    for _ in range(10_000):
        obs = env.reset(rng)
        assert abs(obs[0] ** 2 + obs[1] ** 2 - 1) < 1e-9
        assert -1 <= obs[0] <= 1 and -1 <= obs[1] <= 1
        assert -1.0 <= obs[2] <= 1.0
        assert -math.pi <= env.state.theta <= math.pi


def test_step_upright_rest_zero_reward():
    env = PendulumEnv()
    env.reset_to(0.0, 0.0)
    _, reward, done = env.step(0.0)
    assert reward == 0.0
    assert not done


def test_step_worst_case_reward():
    env = PendulumEnv()
    env.reset_to(math.pi, 8.0)
    _, reward, _ = env.step(2.0)
    assert abs(reward - (-16.2736044)) < 1e-6


def test_step_hand_computed_dynamics():
    env = PendulumEnv()
    env.reset_to(0.1, 0.0)
    env.step(0.0)
    # theta_dot = 3g/(2l) * sin(0.1) * dt, theta from the new speed
    assert abs(env.state.theta_dot - 0.07487506248512112) < 1e-9
    assert abs(env.state.theta - 0.10374375312425606) < 1e-9


def test_action_is_clamped():
    a, b = PendulumEnv(), PendulumEnv()
    a.reset_to(0.3, 0.2)
    b.reset_to(0.3, 0.2)
    obs_a, r_a, _ = a.step(50.0)
    obs_b, r_b, _ = b.step(2.0)
    np.testing.assert_array_equal(obs_a, obs_b)
    assert r_a == r_b


def test_episode_length_and_finished_error():
    env = PendulumEnv()
    env.reset(np.random.default_rng(0))
    dones = [env.step(0.0)[2] for _ in range(200)]
    assert dones[-1] and not any(dones[:-1])
    assert env.state.step_count == 200
    with pytest.raises(EpisodeFinishedError):
        env.step(0.0)


def test_step_without_reset_raises():
    with pytest.raises(EpisodeFinishedError):
        PendulumEnv().step(0.0)


def test_non_finite_action_rejected():
    env = PendulumEnv()
    env.reset_to(0.0, 0.0)
    with pytest.raises(ValueError):
        env.step(float("nan"))


def test_params_validation():
    with pytest.raises(ValueError):
        EnvParams(gravity=0.0)


@settings(max_examples=300)
@given(st.floats(-math.pi, math.pi), st.floats(-8, 8), st.floats(-5, 5))
def test_reward_bound_speed_clamp_and_energy_injection(theta, theta_dot, action):
    env = PendulumEnv()
    env.reset_to(theta, theta_dot)
    obs, reward, _ = env.step(action)
    assert REWARD_MIN - 1e-12 <= reward <= 0.0
    assert abs(obs[2]) <= 8.0
    assert abs(obs[0] ** 2 + obs[1] ** 2 - 1) < 1e-9
    # unclamped change is at most (15 + 6) * dt; clamping only shrinks it
    assert abs(env.state.theta_dot - theta_dot) <= (15 + 6) * 0.05 + 1e-12


def test_determinism_identical_sequences():
    actions = np.random.default_rng(5).uniform(-2, 2, 200)
    traces = []
    for _ in range(2):
        env = PendulumEnv()
        env.reset(np.random.default_rng(9))
        traces.append([env.step(a)[:2] for a in actions])
    for (o1, r1), (o2, r2) in zip(*traces):
        assert np.array_equal(o1, o2) and r1 == r2


def test_random_policy_scores_badly():
    rng = np.random.default_rng(2024)
    env = PendulumEnv()
    for _ in range(20):
        env.reset(rng)
        total, done = 0.0, False
        while not done:
            _, r, done = env.step(rng.uniform(-2, 2))
            total += r
        assert total < -200
