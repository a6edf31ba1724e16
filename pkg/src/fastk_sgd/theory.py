"""Error bounds for fastest-k SGD and the bound-optimal schedule for k.

All policy computations use the bound without the concentration slack
``eps``; :func:`bound_probability` is the only place ``eps`` enters.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .stragglers import order_stat_mean, order_stat_variance


class DegeneratePolicyError(ValueError):
    """Raised when the gap has already reached the floor the next k would give."""


@dataclass(frozen=True)
class SystemParams:
    eta: float
    L: float
    c: float
    sigma2: float
    s: int
    n: int
    rate: float
    e0: float
    mg: float = 0.0
    eps: float = 0.1

    def __post_init__(self):
        for name in ("eta", "L", "c", "sigma2", "s", "n", "rate", "e0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mg < 0:
            raise ValueError("mg must be nonnegative")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not self.eta * self.c < 1:
            raise ValueError("eta * c must be < 1")

    @property
    def alpha(self) -> float:
        """Per-iteration contraction exponent, -ln(1 - eta*c)."""
        return -math.log1p(-self.eta * self.c)

    def mu(self, k: int) -> float:
        return order_stat_mean(self.n, k, self.rate)

    def to_dict(self) -> dict:
        return asdict(self)


# Parameters used for the worked exponential example (n=5, mean response 5).
EXAMPLE_PARAMS = SystemParams(eta=0.001, L=2.0, c=1.0, sigma2=10.0, s=10, n=5, rate=0.2, e0=100.0)
# Reference outputs quoted alongside that example; kept for reporting only.
REPORTED_FIRST_SWITCH = 589.0
REPORTED_FIXED_CROSSOVERS = (1098.0, 6623.0)


def _check_k(k: int, p: SystemParams):
    if not 1 <= k <= p.n:
        raise ValueError(f"k={k} outside 1..{p.n}")


def error_floor(k: int, p: SystemParams) -> float:
    _check_k(k, p)
    return p.eta * p.L * p.sigma2 / (2.0 * p.c * k * p.s)


def error_bound_iterations(j, k: int, p: SystemParams):
    """Upper bound on E[F(w_j)] - F* after ``j`` iterations with fixed k."""
    floor = error_floor(k, p)
    return floor + (1.0 - p.eta * p.c) ** np.asarray(j, dtype=np.float64) * (p.e0 - floor)


def error_bound_time(t, k: int, p: SystemParams):
    """Bound on the gap after wall-clock time ``t`` (scalar or array)."""
    floor = error_floor(k, p)
    t = np.asarray(t, dtype=np.float64)
    out = floor + np.exp(-p.alpha * t / p.mu(k)) * (p.e0 - floor)
    return float(out) if out.ndim == 0 else out


def bound_probability(t: float, k: int, p: SystemParams) -> float:
    """Lower bound on the probability that the time bound holds at ``t``, clamped at 0."""
    if not t > 0:
        raise ValueError("t must be positive")
    _check_k(k, p)
    var_k = order_stat_variance(p.n, k, p.rate)
    corr = var_k / p.eps**2 * (2.0 / (t * p.mu(k)) + 1.0 / t**2)
    return max(0.0, 1.0 - corr)


def bound_rate(t_rel, k: int, gap_at_segment_start: float, p: SystemParams):
    """|de/dt| at ``t_rel`` into a segment that started with gap ``gap_at_segment_start``."""
    floor = error_floor(k, p)
    if not gap_at_segment_start > floor:
        raise ValueError(f"gap {gap_at_segment_start} is not above the k={k} floor {floor}")
    t_rel = np.asarray(t_rel, dtype=np.float64)
    if np.any(t_rel < 0):
        raise ValueError("t_rel must be nonnegative")
    a = p.alpha / p.mu(k)
    out = a * np.exp(-a * t_rel) * (gap_at_segment_start - floor)
    return float(out) if out.ndim == 0 else out


@dataclass
class PolicySchedule:
    """Switch times t_1..t_{n-1} (t_0 = 0 implicit) and the gap e(t_k) at each.

    ``clamped`` flags switches whose closed-form time fell at or before the
    previous switch and were therefore placed at the previous switch.
    """

    switch_times: np.ndarray
    gaps_at_switch: np.ndarray
    n: int
    clamped: list = field(default_factory=list)

    def segment_starts(self) -> np.ndarray:
        return np.concatenate([[0.0], self.switch_times])


def switching_times(p: SystemParams) -> PolicySchedule:
    if p.n < 2:
        raise ValueError("need at least two workers to switch")
    alpha = p.alpha
    t_prev, gap = 0.0, p.e0
    times, gaps, clamped = [], [], []
    for k in range(1, p.n):
        mu_k, mu_next = p.mu(k), p.mu(k + 1)
        gain = mu_next - mu_k
        inner = 2.0 * p.c * k * (k + 1) * p.s * gap - p.eta * p.L * (k + 1) * p.sigma2
        if inner <= 0:
            raise DegeneratePolicyError(
                f"gap {gap:g} at t={t_prev:g} is not above the k={k} floor; cannot schedule switch to k={k + 1}"
            )
        if gain <= 0:
            dt, was_clamped = 0.0, True
        else:
            dt = mu_k / alpha * (math.log(gain) - math.log(p.eta * p.L * p.sigma2 * mu_k) + math.log(inner))
            was_clamped = dt <= 0
            dt = max(dt, 0.0)
        floor = error_floor(k, p)
        gap = floor + math.exp(-alpha * dt / mu_k) * (gap - floor)
        t_prev += dt
        times.append(t_prev)
        gaps.append(gap)
        clamped.append(was_clamped)
    return PolicySchedule(np.array(times), np.array(gaps), p.n, clamped)


def best_fixed_k(t, p: SystemParams):
    """Fixed k minimizing the time bound at ``t``; ties favor the smaller k."""
    t = np.asarray(t, dtype=np.float64)
    curves = np.stack([np.atleast_1d(error_bound_time(t, k, p)) for k in range(1, p.n + 1)])
    # argmin returns the first minimum, i.e. the smallest k
    best = np.argmin(curves, axis=0) + 1
    return int(best[0]) if t.ndim == 0 else best


def adaptive_k_of_t(t, schedule: PolicySchedule):
    t = np.asarray(t, dtype=np.float64)
    k = 1 + np.searchsorted(schedule.switch_times, t, side="right")
    k = np.minimum(k, schedule.n)
    return int(k) if t.ndim == 0 else k


def adaptive_bound_curve(t_grid, p: SystemParams, schedule: PolicySchedule | None = None) -> np.ndarray:
    """Bound along the adaptive schedule, continuous across switch times."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or np.any(t_grid < 0) or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be a sorted 1-d array of nonnegative times")
    if schedule is None:
        schedule = switching_times(p)
    starts = schedule.segment_starts()
    start_gaps = np.concatenate([[p.e0], schedule.gaps_at_switch])
    ks = adaptive_k_of_t(t_grid, schedule)
    out = np.empty_like(t_grid)
    for k in np.unique(ks):
        sel = ks == k
        floor = error_floor(int(k), p)
        tau = t_grid[sel] - starts[k - 1]
        out[sel] = floor + np.exp(-p.alpha * tau / p.mu(int(k))) * (start_gaps[k - 1] - floor)
    return out


def validate_step_size(k: int, p: SystemParams) -> bool:
    _check_k(k, p)
    return p.eta <= 1.0 / (2.0 * p.L * (p.mg / (k * p.s) + 1.0))


def fixed_k_crossovers(p: SystemParams, t_max: float, points: int = 100_001) -> list[tuple[float, int]]:
    """Times at which :func:`best_fixed_k` changes, as ``(time, new_k)`` pairs.

    Change points are bracketed on a uniform grid over ``[0, t_max]`` and then
    refined by bisection on the difference of the two competing curves.
    """
    grid = np.linspace(0.0, t_max, points)
    best = best_fixed_k(grid, p)
    out = []
    for i in np.nonzero(np.diff(best))[0]:
        k_old, k_new = int(best[i]), int(best[i + 1])
        lo, hi = grid[i], grid[i + 1]
        diff = lambda t: error_bound_time(t, k_new, p) - error_bound_time(t, k_old, p)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if diff(mid) < 0:
                hi = mid
            else:
                lo = mid
        out.append((hi, k_new))
    return out
