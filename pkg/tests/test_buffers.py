import numpy as np
import pytest

from oracles import discounted_sums_brute, gae_brute_force
from pendulum_rl.buffers import (BufferStateError, NotEnoughDataError, ReplayBuffer,
                                 RolloutBuffer, Transition, discount_cumsum)


def tr(k):
    return Transition(np.full(3, k, dtype=float), np.array([0.0]), -float(k), np.zeros(3), 0.0)


# -- replay ---------------------------------------------------------------

def test_replay_fifo_eviction():
    buf = ReplayBuffer(capacity=3)
    for k in (1, 2, 3, 4):
        buf.add(tr(k))
    assert [t.s[0] for t in buf.contents()] == [2.0, 3.0, 4.0]


def test_replay_size_growth():
    buf = ReplayBuffer(capacity=5)
    assert len(buf) == 0
    buf.add(tr(1))
    assert len(buf) == 1


def test_replay_capacity_cap():
    buf = ReplayBuffer()
    assert buf.capacity == 20000
    for k in range(25_000):
        buf.add(tr(k))
    assert len(buf) == 20000
    assert buf.contents()[0].s[0] == 5000.0
    assert buf.contents()[-1].s[0] == 24999.0


def test_replay_sample_sizes():
    rng = np.random.default_rng(0)
    buf = ReplayBuffer(capacity=100)
    for k in range(100):
        buf.add(tr(k))
    batch = buf.sample(64, rng)
    assert batch.s.shape == (64, 3) and batch.r.shape == (64,)

    single = ReplayBuffer(capacity=4)
    single.add(tr(7))
    assert single.sample(1, rng).s[0, 0] == 7.0


def test_replay_not_enough_data():
    buf = ReplayBuffer(capacity=10)
    buf.add(tr(1))
    with pytest.raises(NotEnoughDataError):
        buf.sample(2, np.random.default_rng(0))


def test_replay_uniformity():
    rng = np.random.default_rng(1)
    buf = ReplayBuffer(capacity=100)
    for k in range(100):
        buf.add(tr(k))
    counts = np.zeros(100)
    for _ in range(1000):
        np.add.at(counts, buf.sample(100, rng).s[:, 0].astype(int), 1)
    n, p = 100_000, 0.01
    sd = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sd + 1)


def test_replay_sample_does_not_mutate():
    rng = np.random.default_rng(2)
    buf = ReplayBuffer(capacity=10)
    for k in range(10):
        buf.add(tr(k))
    before = [a.copy() for a in (buf.s, buf.a, buf.r, buf.s_next, buf.d)]
    batch = buf.sample(5, rng)
    batch.s[...] = -1
    after = (buf.s, buf.a, buf.r, buf.s_next, buf.d)
    assert all(np.array_equal(x, y) for x, y in zip(before, after))


# -- discounting ----------------------------------------------------------

def test_discount_cumsum_examples():
    np.testing.assert_allclose(discount_cumsum([1, 2, 3], 0.5), [2.75, 3.5, 3.0], atol=1e-12)
    x = np.array([0.3, -1.2, 4.0])
    np.testing.assert_array_equal(discount_cumsum(x, 0.0), x)
    np.testing.assert_allclose(discount_cumsum(x, 1.0), [3.1, 2.8, 4.0], atol=1e-12)


def test_discount_cumsum_vs_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.normal(size=rng.integers(1, 40))
        g = rng.uniform()
        np.testing.assert_allclose(discount_cumsum(x, g), discounted_sums_brute(x, g), atol=1e-12)


# -- rollout / GAE --------------------------------------------------------

def fill(buf, rewards, values):
    for r, v in zip(rewards, values):
        buf.store(np.zeros(3), np.zeros(1), r, v, 0.0)


def test_finish_path_gamma_one():
    buf = RolloutBuffer(size=10, gamma=1.0, lam=1.0)
    fill(buf, [1, 1], [0, 0])
    buf.finish_path(0.0)
    np.testing.assert_allclose(buf.adv[:2], [2, 1], atol=1e-12)
    np.testing.assert_allclose(buf.ret[:2], [2, 1], atol=1e-12)


def test_finish_path_half():
    buf = RolloutBuffer(size=10, gamma=0.5, lam=0.5)
    fill(buf, [1, 1], [0, 0])
    buf.finish_path(0.0)
    np.testing.assert_allclose(buf.adv[:2], [1.25, 1.0], atol=1e-12)


def test_finish_path_lambda_zero_is_td_error():
    rng = np.random.default_rng(4)
    r, v = rng.normal(size=6), rng.normal(size=6)
    buf = RolloutBuffer(size=10, gamma=0.9, lam=0.0)
    fill(buf, r, v)
    buf.finish_path(0.7)
    delta = r + 0.9 * np.append(v[1:], 0.7) - v
    np.testing.assert_array_equal(buf.adv[:6], delta)


def test_finish_path_matches_brute_force_over_segments():
    rng = np.random.default_rng(5)
    buf = RolloutBuffer(size=200, gamma=0.9, lam=0.95)
    for _ in range(50):
        buf.clear()
        buf.gamma, buf.lam = rng.uniform(), rng.uniform()
        starts = []
        for _ in range(3):
            T = int(rng.integers(1, 33))
            r, v, last = rng.normal(size=T), rng.normal(size=T), float(rng.normal())
            starts.append((len(buf), r, v, last))
            fill(buf, r, v)
            buf.finish_path(last)
        for s, r, v, last in starts:
            want = gae_brute_force(r, v, last, buf.gamma, buf.lam)
            assert np.max(np.abs(buf.adv[s:s + len(r)] - want)) < 1e-10


def test_rewards_to_go_telescoping():
    rng = np.random.default_rng(6)
    r, v = rng.normal(size=20), rng.normal(size=20)
    buf = RolloutBuffer(size=20, gamma=0.9, lam=1.0)
    fill(buf, r, v)
    buf.finish_path(0.0)
    np.testing.assert_allclose(buf.adv[:20], buf.ret[:20] - v, atol=1e-10)


def test_finish_path_requires_open_segment():
    buf = RolloutBuffer(size=4)
    with pytest.raises(BufferStateError):
        buf.finish_path(0.0)
    fill(buf, [1.0], [0.0])
    buf.finish_path(0.0)
    with pytest.raises(BufferStateError):
        buf.finish_path(0.0)


def test_store_into_full_buffer():
    buf = RolloutBuffer(size=2)
    fill(buf, [1, 1], [0, 0])
    assert buf.full
    with pytest.raises(BufferStateError):
        fill(buf, [1], [0])


def test_minibatches_cover_indices():
    rng = np.random.default_rng(7)
    buf = RolloutBuffer(size=10_000)
    fill(buf, np.zeros(10_000), np.zeros(10_000))
    buf.finish_path(0.0)
    batches = buf.get_minibatches(200, rng)
    assert len(batches) == 50 and all(len(b) == 200 for b in batches)
    for _ in range(100):
        idx = np.concatenate(buf.get_minibatches(200, rng))
        assert len(idx) == 10_000 and np.array_equal(np.sort(idx), np.arange(10_000))


def test_minibatches_short_chunk():
    buf = RolloutBuffer(size=10)
    fill(buf, np.zeros(5), np.zeros(5))
    buf.finish_path(0.0)
    batches = buf.get_minibatches(200, np.random.default_rng(0))
    assert len(batches) == 1 and len(batches[0]) == 5


def test_unsealed_buffer_rejected():
    buf = RolloutBuffer(size=10)
    rng = np.random.default_rng(0)
    with pytest.raises(BufferStateError):
        buf.get_minibatches(2, rng)
    fill(buf, [1, 2], [0, 0])
    with pytest.raises(BufferStateError):
        buf.get_minibatches(2, rng)
    with pytest.raises(BufferStateError):
        buf.advantages()


def test_advantage_normalisation():
    rng = np.random.default_rng(8)
    buf = RolloutBuffer(size=50)
    fill(buf, rng.normal(size=50), rng.normal(size=50))
    buf.finish_path(0.0)
    adv = buf.advantages(normalize=True)
    assert abs(adv.mean()) < 1e-12 and abs(adv.std() - 1) < 1e-6
    np.testing.assert_array_equal(buf.advantages(normalize=False), buf.adv[:50])


def test_clear_idempotent_and_refill_equivalent():
    def run(buf):
        fill(buf, [1.0, -2.0, 0.5], [0.1, 0.2, 0.3])
        buf.finish_path(0.4)
        return buf.adv[:3].copy(), buf.ret[:3].copy(), buf.get_minibatches(2, np.random.default_rng(9))

    buf = RolloutBuffer(size=5)
    first = run(buf)
    buf.clear()
    buf.clear()
    assert len(buf) == 0
    second = run(buf)
    np.testing.assert_array_equal(first[0], second[0])
    np.testing.assert_array_equal(first[1], second[1])
    assert all(np.array_equal(a, b) for a, b in zip(first[2], second[2]))
