"""Counter-based streams: purity, independence of layout, rough uniformity."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from balking_ps.rng import CounterStreams


@given(seed=st.integers(0, 2**64 - 1), rep=st.integers(0, 2**40), draw=st.integers(0, 2**41))
def test_pure_function_of_coordinates(seed, rep, draw):
    a = CounterStreams(seed)
    b = CounterStreams(seed)
    ka = a.stream_keys([rep])
    kb = b.stream_keys(np.arange(rep, rep + 3))[:1]
    assert a.uniform(ka, draw)[0] == b.uniform(kb, draw)[0]


@given(seed=st.integers(0, 2**64 - 1))
def test_open_unit_interval(seed):
    s = CounterStreams(seed)
    u = s.uniform(s.stream_keys(np.arange(4096)), 7)
    assert np.all(u > 0.0) and np.all(u < 1.0)


def test_per_path_draw_indices():
    s = CounterStreams(3)
    keys = s.stream_keys(np.arange(5))
    draws = np.array([0, 4, 9, 2**40, 11], dtype=np.uint64)
    together = s.uniform(keys, draws)
    one_by_one = [s.uniform(keys[i : i + 1], draws[i])[0] for i in range(5)]
    assert together.tolist() == one_by_one


def test_seeds_and_reps_give_different_streams():
    keys = CounterStreams(1).stream_keys(np.arange(10_000))
    assert np.unique(keys).size == keys.size
    other = CounterStreams(2).stream_keys(np.arange(10_000))
    assert not np.any(keys == other)


@pytest.mark.parametrize("seed", [0, 1, 20240917])
def test_uniformity_across_reps(seed):
    s = CounterStreams(seed)
    u = s.uniform(s.stream_keys(np.arange(200_000)), 1)
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_uniformity_along_a_stream():
    s = CounterStreams(11)
    key = s.stream_keys([0])
    u = np.array([s.uniform(key, d)[0] for d in range(20_000)])
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    # lag-one correlation of consecutive draws
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 4.0 / np.sqrt(u.size)


def test_adjacent_replications_uncorrelated():
    s = CounterStreams(5)
    u = s.uniform(s.stream_keys(np.arange(100_001)), 3)
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 4.0 / np.sqrt(u.size)
