"""Replay buffer: ring semantics, simplex enforcement on push, uniform
sampling statistics, and the snapshot round trip."""

import numpy as np
import pytest

from psadpg.errors import DimensionError
from psadpg.replay import (
    ReplayBuffer,
    Transition,
    check_probability_vector,
    load_snapshot,
    one_hot,
)


def tr(i, obs_dim=3, n_actions=2, done=False, action=None):
    # distinguishable transition with reward = i
    s = np.full(obs_dim, float(i))
    s2 = np.full(obs_dim, float(i) + 0.5)
    a = one_hot(i % n_actions if action is None else action, n_actions)
    return Transition(s, a, float(i), s2, done)


def test_one_hot_layout_and_range():
    v = one_hot(2, 4)
    np.testing.assert_array_equal(v, [0.0, 0.0, 1.0, 0.0])
    assert v.dtype == np.float64
    with pytest.raises(ValueError):
        one_hot(4, 4)
    with pytest.raises(ValueError):
        one_hot(-1, 4)


def test_check_probability_vector():
    check_probability_vector(np.array([0.25, 0.75]))
    check_probability_vector(np.array([0.3, 0.3, 0.4]), n=3)
    with pytest.raises(DimensionError):
        check_probability_vector(np.array([0.5, 0.5]), n=3)
    with pytest.raises(DimensionError):
        check_probability_vector(np.eye(2))
    with pytest.raises(ValueError):
        check_probability_vector(np.array([0.7, 0.7]))  # sums to 1.4
    with pytest.raises(ValueError):
        check_probability_vector(np.array([-0.1, 1.1]))
    with pytest.raises(ValueError):
        check_probability_vector(np.array([np.nan, 1.0]))
    # a tiny sum slack is allowed; past it the push must fail
    check_probability_vector(np.array([0.5, 0.5 + 5e-7]))
    with pytest.raises(ValueError):
        check_probability_vector(np.array([0.5, 0.5 + 5e-6]))


def test_len_grows_then_saturates():
    buf = ReplayBuffer(5, 3, 2)
    assert len(buf) == 0
    for i in range(5):
        buf.push(tr(i))
        assert len(buf) == i + 1
    for i in range(5, 12):
        buf.push(tr(i))
        assert len(buf) == 5


def test_fifo_overwrite_order():
    buf = ReplayBuffer(4, 3, 2)
    for i in range(7):  # wraps; 0, 1, 2 evicted
        buf.push(tr(i))
    rewards = [t.reward for t in buf.contents()]
    assert rewards == [3.0, 4.0, 5.0, 6.0]  # oldest first


def test_contents_before_wrap_is_insertion_order():
    buf = ReplayBuffer(10, 3, 2)
    for i in range(6):
        buf.push(tr(i))
    assert [t.reward for t in buf.contents()] == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]


def test_push_validation():
    buf = ReplayBuffer(4, 3, 2)
    with pytest.raises(DimensionError):
        buf.push(Transition(np.zeros(2), one_hot(0, 2), 0.0, np.zeros(3), False))
    with pytest.raises(DimensionError):
        buf.push(Transition(np.zeros(3), one_hot(0, 3), 0.0, np.zeros(3), False))
    with pytest.raises(ValueError):
        buf.push(Transition(np.zeros(3), np.array([0.7, 0.7]), 0.0, np.zeros(3), False))
    with pytest.raises(ValueError):
        buf.push(Transition(np.full(3, np.nan), one_hot(0, 2), 0.0, np.zeros(3), False))
    with pytest.raises(ValueError):
        buf.push(Transition(np.zeros(3), one_hot(0, 2), float("inf"), np.zeros(3), False))
    assert len(buf) == 0  # nothing partial was written


def test_sample_returns_none_until_ready():
    buf = ReplayBuffer(100, 3, 2)
    rng = np.random.default_rng(0)
    for i in range(7):
        assert buf.sample(8, rng) is None
        assert buf.sample_arrays(8, rng) is None
        buf.push(tr(i))
    buf.push(tr(7))
    assert buf.sample(8, rng) is not None


def test_sample_without_replacement_and_copies():
    buf = ReplayBuffer(32, 3, 2)
    for i in range(32):
        buf.push(tr(i))
    rng = np.random.default_rng(1)
    got = buf.sample(32, rng)
    assert sorted(t.reward for t in got) == [float(i) for i in range(32)]
    # returned arrays are copies; mutating them must not corrupt the store
    got[0].state[:] = 999.0
    assert not any(t.state[0] == 999.0 for t in buf.contents())


def test_sample_arrays_matches_storage_rows():
    buf = ReplayBuffer(64, 3, 2)
    for i in range(40):
        buf.push(tr(i, done=(i % 5 == 0)))
    rng = np.random.default_rng(2)
    batch = buf.sample_arrays(16, rng)
    assert batch.states.shape == (16, 3)
    assert batch.surrogate_actions.shape == (16, 2)
    assert batch.rewards.shape == (16,)
    assert batch.dones.dtype == np.bool_
    for k in range(16):
        i = int(batch.rewards[k])
        np.testing.assert_array_equal(batch.states[k], np.full(3, float(i)))
        np.testing.assert_array_equal(batch.next_states[k], np.full(3, float(i) + 0.5))
        assert batch.dones[k] == (i % 5 == 0)


def test_sampling_is_uniform():
    # chi-square-ish bound: each of 50 slots should appear ~N*n/50 times
    buf = ReplayBuffer(50, 3, 2)
    for i in range(50):
        buf.push(tr(i))
    rng = np.random.default_rng(3)
    counts = np.zeros(50)
    draws = 4000
    for _ in range(draws):
        batch = buf.sample_arrays(10, rng)
        for r in batch.rewards:
            counts[int(r)] += 1
    expect = draws * 10 / 50
    sd = np.sqrt(draws * 10 * (1 / 50) * (49 / 50))
    assert np.abs(counts - expect).max() <= 5 * sd


def test_all_one_hot_scan():
    buf = ReplayBuffer(10, 3, 2)
    for i in range(6):
        buf.push(tr(i))
    assert buf.all_one_hot()
    buf.push(Transition(np.zeros(3), np.array([0.5, 0.5]), 0.0, np.zeros(3), False))
    assert not buf.all_one_hot()


def test_snapshot_round_trip_is_exact():
    buf = ReplayBuffer(16, 3, 2)
    rng = np.random.default_rng(4)
    for i in range(12):
        t = tr(i, done=bool(rng.integers(2)))
        t.state[:] = rng.standard_normal(3)  # awkward floats on purpose
        t.next_state[:] = rng.standard_normal(3)
        t.reward = float(rng.standard_normal())
        buf.push(t)
    buf.snapshot_csv("/tmp/replay_snap.csv")
    back = load_snapshot("/tmp/replay_snap.csv")
    want = buf.contents()
    assert len(back) == len(want)
    for a, b in zip(back, want):
        np.testing.assert_array_equal(a.state, b.state)
        np.testing.assert_array_equal(a.surrogate_action, b.surrogate_action)
        assert a.reward == b.reward  # repr round trip, no drift at all
        np.testing.assert_array_equal(a.next_state, b.next_state)
        assert a.done == b.done


def test_capacity_validation():
    with pytest.raises(ValueError):
        ReplayBuffer(0, 3, 2)
    buf = ReplayBuffer(4, 3, 2)
    with pytest.raises(ValueError):
        buf.sample(0, np.random.default_rng(0))
