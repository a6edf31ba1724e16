import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastk_sgd.stragglers import (
    ResponseDistribution,
    fastest_k_indices,
    kth_smallest,
    order_stat_mean,
    order_stat_variance,
    sample_response_times,
)


def test_sampling_is_deterministic():
    dist = ResponseDistribution(rate=2.0)
    a = sample_response_times(dist, 7, np.random.default_rng(3))
    b = sample_response_times(dist, 7, np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("rate", [1.0, 1 / 50])
def test_sample_mean(rate):
    x = sample_response_times(ResponseDistribution(rate=rate), 100_000, np.random.default_rng(0))
    se = (1 / rate) / np.sqrt(x.size)
    assert abs(x.mean() - 1 / rate) < 3 * se


def test_deterministic_stub():
    x = sample_response_times(ResponseDistribution("deterministic", 4.0), 3, np.random.default_rng(0))
    np.testing.assert_array_equal(x, [0.25, 0.25, 0.25])


def test_bad_distribution():
    with pytest.raises(ValueError):
        ResponseDistribution(rate=0.0)
    with pytest.raises(ValueError):
        ResponseDistribution("pareto", 1.0)


@pytest.mark.parametrize("times,k,expected", [((3, 1, 2), 1, 1), ((3, 1, 2), 3, 3), ((5, 5, 2), 2, 5)])
def test_kth_smallest(times, k, expected):
    assert kth_smallest(times, k) == expected


def test_kth_smallest_range():
    with pytest.raises(ValueError):
        kth_smallest((1, 2), 3)
    with pytest.raises(ValueError):
        kth_smallest((1, 2), 0)


def test_fastest_k_indices():
    assert set(fastest_k_indices((3, 1, 2), 2)) == {1, 2}
    assert set(fastest_k_indices((1.0, 1.0, 1.0, 1.0), 2)) == {0, 1}
    with pytest.raises(ValueError):
        fastest_k_indices((1, 2), 3)


def test_selection_frequency_uniform():
    n, k, iters = 10, 3, 100_000
    rng = np.random.default_rng(7)
    dist = ResponseDistribution(rate=1.0)
    counts = np.zeros(n)
    for _ in range(iters):
        counts[fastest_k_indices(sample_response_times(dist, n, rng), k)] += 1
    p = k / n
    se = np.sqrt(p * (1 - p) / iters)
    assert np.all(np.abs(counts / iters - p) < 3 * se)


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=20), st.data())
def test_fastest_k_indices_cardinality(times, data):
    k = data.draw(st.integers(1, len(times)))
    idx = fastest_k_indices(times, k)
    assert len(set(idx)) == k
    assert set(idx) <= set(range(len(times)))
    assert max(np.asarray(times)[idx]) == kth_smallest(times, k)


def test_order_stat_mean_examples():
    assert order_stat_mean(1, 1, 1.0) == 1.0
    assert order_stat_mean(5, 1, 0.2) == pytest.approx(1.0)
    assert order_stat_mean(5, 5, 0.2) == pytest.approx(5 * (1 + 1 / 2 + 1 / 3 + 1 / 4 + 1 / 5))
    assert order_stat_mean(5, 5, 0.2) == pytest.approx(11.416666666666666)


def test_order_stat_variance_examples():
    assert order_stat_variance(1, 1, 1.0) == 1.0
    assert order_stat_variance(5, 1, 1.0) == pytest.approx(0.04)


def test_order_stat_variance_monte_carlo():
    x = np.sort(np.random.default_rng(11).exponential(size=(1_000_000, 5)), axis=1)[:, 2]
    m4 = np.mean((x - x.mean()) ** 4)
    se = np.sqrt((m4 - x.var() ** 2) / x.size)
    assert abs(x.var() - order_stat_variance(5, 3, 1.0)) < 3 * se


@pytest.mark.parametrize("n", range(1, 12))
def test_mean_increasing_and_harmonic(n):
    mus = [order_stat_mean(n, k, 0.5) for k in range(1, n + 1)]
    assert all(np.diff(mus) > 0)
    assert mus[-1] == pytest.approx(sum(1 / i for i in range(1, n + 1)) / 0.5)


def test_k_out_of_range():
    with pytest.raises(ValueError):
        order_stat_mean(3, 4, 1.0)
    with pytest.raises(ValueError):
        order_stat_variance(3, 0, 1.0)
