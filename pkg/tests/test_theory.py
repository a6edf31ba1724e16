import math
from dataclasses import replace

import numpy as np
import pytest

from fastk_sgd.theory import (
    EXAMPLE_PARAMS as P,
    DegeneratePolicyError,
    PolicySchedule,
    SystemParams,
    adaptive_bound_curve,
    adaptive_k_of_t,
    best_fixed_k,
    bound_probability,
    bound_rate,
    error_bound_iterations,
    error_bound_time,
    error_floor,
    fixed_k_crossovers,
    switching_times,
    validate_step_size,
)


def harmonic_mu(n, k, rate):
    return sum(1.0 / i for i in range(n - k + 1, n + 1)) / rate


def bisect_switch(p, k, t_prev, gap_prev):
    """Solve the rate-matching equality for the switch k -> k+1 by bisection.

    Works only from the raw rate expressions, not the closed form.
    """
    alpha = -math.log(1 - p.eta * p.c)
    mu_k, mu_next = harmonic_mu(p.n, k, p.rate), harmonic_mu(p.n, k + 1, p.rate)
    f_k = p.eta * p.L * p.sigma2 / (2 * p.c * k * p.s)
    f_next = p.eta * p.L * p.sigma2 / (2 * p.c * (k + 1) * p.s)

    def gap(tau):
        return f_k + math.exp(-alpha * tau / mu_k) * (gap_prev - f_k)

    def h(tau):
        rate_next = alpha / mu_next * (gap(tau) - f_next)
        rate_cur = alpha / mu_k * math.exp(-alpha * tau / mu_k) * (gap_prev - f_k)
        return rate_next - rate_cur

    lo, hi = 0.0, 1.0
    while h(hi) < 0:
        hi *= 2
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    return t_prev + hi, gap(hi)


class TestFloorAndBounds:
    def test_floor_examples(self):
        assert error_floor(1, P) == pytest.approx(0.001, rel=1e-14)
        assert error_floor(5, P) == pytest.approx(0.0002, rel=1e-14)
        assert error_floor(2, replace(P, s=20)) == pytest.approx(error_floor(2, P) / 2)

    def test_floor_range(self):
        with pytest.raises(ValueError):
            error_floor(6, P)

    def test_iterations_bound(self):
        assert error_bound_iterations(0, 3, P) == pytest.approx(100.0)
        assert error_bound_iterations(1, 1, P) == pytest.approx(0.001 + 0.999 * (100 - 0.001), rel=1e-14)
        assert error_bound_iterations(1e8, 2, P) == pytest.approx(error_floor(2, P), rel=1e-12)

    def test_time_bound_endpoints(self):
        for k in range(1, 6):
            assert error_bound_time(0.0, k, P) == 100.0
        assert error_bound_time(1e9, 1, P) == pytest.approx(0.001, rel=1e-12)

    @pytest.mark.parametrize("k", range(1, 6))
    def test_time_bound_bridges_iteration_bound(self, k):
        mu = harmonic_mu(5, k, 0.2)
        assert error_bound_time(mu, k, P) == pytest.approx(error_bound_iterations(1, k, P), rel=1e-13)
        t = np.linspace(0, 5e4, 101)
        np.testing.assert_allclose(error_bound_time(t, k, P), error_bound_iterations(t / mu, k, P), rtol=1e-12)

    @pytest.mark.parametrize("k", range(1, 6))
    def test_time_bound_decreasing_above_floor(self, k):
        v = error_bound_time(np.linspace(0, 2e4, 500), k, P)
        assert np.all(np.diff(v) < 0)
        assert np.all(v > error_floor(k, P))

    def test_floor_strictly_decreasing_in_k(self):
        assert all(error_floor(k, P) > error_floor(k + 1, P) for k in range(1, 5))

    def test_requires_eta_c_below_one(self):
        with pytest.raises(ValueError):
            replace(P, eta=1.0)


class TestProbability:
    def test_worked_value(self):
        # sigma_1^2 = 25 * (1/5)^2 = 1 and mu_1 = 5 * (1/5) = 1
        expected = 1 - (1 / 0.01) * (2 / 1e4 + 1 / 1e8)
        assert bound_probability(1e4, 1, P) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.979999)

    def test_limits(self):
        assert bound_probability(1e12, 3, P) == pytest.approx(1.0)
        assert bound_probability(1.0, 3, P) == 0.0

    def test_nonpositive_t(self):
        with pytest.raises(ValueError):
            bound_probability(0.0, 1, P)


class TestRate:
    def test_rate_at_zero(self):
        a = P.alpha / harmonic_mu(5, 2, 0.2)
        assert bound_rate(0.0, 2, 50.0, P) == pytest.approx(a * (50.0 - error_floor(2, P)))

    def test_k1_fastest_at_start(self):
        r1 = bound_rate(0.0, 1, P.e0, P)
        assert all(r1 > bound_rate(0.0, k, P.e0, P) for k in range(2, 6))

    def test_decreasing(self):
        r = bound_rate(np.linspace(0, 1e4, 100), 3, 10.0, P)
        assert np.all(np.diff(r) < 0)

    def test_gap_below_floor(self):
        with pytest.raises(ValueError):
            bound_rate(0.0, 1, 0.0005, P)

    def test_matches_derivative(self):
        t, h = 321.0, 1e-3
        fd = -(error_bound_time(t + h, 2, P) - error_bound_time(t - h, 2, P)) / (2 * h)
        assert bound_rate(t, 2, P.e0, P) == pytest.approx(fd, rel=1e-6)


class TestSwitchingTimes:
    def test_closed_form_matches_bisection(self):
        sched = switching_times(P)
        t_prev, gap = 0.0, P.e0
        for k in range(1, 5):
            t_bis, gap = bisect_switch(P, k, t_prev, gap)
            assert sched.switch_times[k - 1] == pytest.approx(t_bis, rel=1e-9)
            t_prev = t_bis
        assert np.all(np.diff(sched.switch_times) > 0)

    def test_rate_matching_at_each_switch(self):
        sched = switching_times(P)
        starts = sched.segment_starts()
        gaps = np.r_[P.e0, sched.gaps_at_switch]
        for k in range(1, 5):
            t_k = sched.switch_times[k - 1]
            new = bound_rate(0.0, k + 1, sched.gaps_at_switch[k - 1], P)
            old = bound_rate(t_k - starts[k - 1], k, gaps[k - 1], P)
            assert new >= old * (1 - 1e-9)
            assert new == pytest.approx(old, rel=1e-9)

    def test_gaps_follow_segment_decay(self):
        sched = switching_times(P)
        assert sched.gaps_at_switch[0] == pytest.approx(error_bound_time(sched.switch_times[0], 1, P), rel=1e-12)

    def test_nonpositive_step_switches_immediately(self):
        # floors close to e0: the k=2 rate already beats k=1 at t=0
        p = replace(P, eta=0.5, sigma2=1900.0, e0=100.0)
        sched = switching_times(p)
        assert sched.clamped[0]
        assert sched.switch_times[0] == 0.0

    def test_zero_gain_rule(self, monkeypatch):
        p = SystemParams(eta=0.001, L=2, c=1, sigma2=10, s=10, n=3, rate=0.2, e0=100)
        mus = {1: 1.0, 2: 1.0, 3: 2.0}
        monkeypatch.setattr(SystemParams, "mu", lambda self, k: mus[k])
        sched = switching_times(p)
        assert sched.switch_times[0] == 0.0
        assert sched.clamped[0]
        assert sched.switch_times[1] > 0

    def test_degenerate_gap(self):
        with pytest.raises(DegeneratePolicyError):
            switching_times(replace(P, e0=0.0005))

    def test_needs_two_workers(self):
        with pytest.raises(ValueError):
            switching_times(replace(P, n=1))


class TestStaircases:
    def test_best_fixed_k_endpoints(self):
        assert best_fixed_k(0.0, P) == 1
        assert best_fixed_k(1e6, P) == 5

    def test_best_fixed_k_non_decreasing(self):
        ks = best_fixed_k(np.linspace(0, 1e5, 200_001), P)
        assert np.all(np.diff(ks) >= 0)
        assert set(ks) <= set(range(1, 6))

    def test_crossovers_bracket_staircase(self):
        cross = fixed_k_crossovers(P, 3e5)
        assert [k for _, k in cross] == [2, 3, 4, 5]
        for t, k in cross:
            assert best_fixed_k(t * (1 + 1e-9), P) == k
            assert best_fixed_k(t * (1 - 1e-6), P) == k - 1

    def test_adaptive_k(self):
        sched = PolicySchedule(np.array([1.0, 2.0, 3.0, 4.0]), np.zeros(4), 5)
        assert adaptive_k_of_t(0.5, sched) == 1
        assert adaptive_k_of_t(1.0, sched) == 2  # right-continuous
        assert adaptive_k_of_t(4.0, sched) == 5
        assert adaptive_k_of_t(100.0, sched) == 5
        ks = adaptive_k_of_t(np.linspace(0, 10, 1001), sched)
        assert np.all(np.diff(ks) >= 0)


class TestAdaptiveCurve:
    def test_start_and_final_floor(self):
        v = adaptive_bound_curve(np.array([0.0, 1e7]), P)
        assert v[0] == 100.0
        assert v[1] == pytest.approx(0.0002, rel=1e-9)

    def test_continuous_at_switches(self):
        sched = switching_times(P)
        for t_k in sched.switch_times:
            left = adaptive_bound_curve(np.array([np.nextafter(t_k, 0)]), P, sched)[0]
            right = adaptive_bound_curve(np.array([t_k]), P, sched)[0]
            assert abs(left - right) < 1e-12

    def test_strictly_decreasing(self):
        v = adaptive_bound_curve(np.linspace(0, 6e4, 6001), P)
        assert np.all(np.diff(v) < 0)

    def test_unsorted_grid(self):
        with pytest.raises(ValueError):
            adaptive_bound_curve(np.array([2.0, 1.0]), P)


class TestStepSize:
    def test_no_mg(self):
        assert validate_step_size(1, P)
        assert validate_step_size(1, replace(P, eta=0.25))
        assert not validate_step_size(1, replace(P, eta=0.2500001))

    def test_large_eta(self):
        assert not validate_step_size(1, replace(P, eta=1.0 - 1e-9, c=0.5))

    def test_mg_tightens(self):
        p = replace(P, mg=100.0, eta=0.05)
        assert not validate_step_size(1, p)  # 1 / (2*2*(100/10 + 1)) = 1/44
        assert validate_step_size(5, p)  # 1 / (2*2*(100/50 + 1)) = 1/12
