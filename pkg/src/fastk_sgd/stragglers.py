"""Worker response times and their order statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("exponential", "deterministic")


@dataclass(frozen=True)
class ResponseDistribution:
    """Per-worker compute time distribution.

    ``exponential`` draws iid Exp(rate) times. ``deterministic`` returns
    ``1/rate`` for every worker; it is a timing stub for tests and degenerate
    comparisons and does not consume the generator.
    """

    kind: str = "exponential"
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown response distribution {self.kind!r}")
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def mean(self) -> float:
        return 1.0 / self.rate


def sample_response_times(dist: ResponseDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one worker")
    if dist.kind == "deterministic":
        return np.full(n, 1.0 / dist.rate)
    return rng.exponential(1.0 / dist.rate, size=n)


def _check_k(k: int, n: int):
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")


def kth_smallest(times, k: int) -> float:
    times = np.asarray(times, dtype=np.float64)
    _check_k(k, times.size)
    return float(np.partition(times, k - 1)[k - 1])


def fastest_k_indices(times, k: int) -> np.ndarray:
    """Sorted indices of the k fastest workers; ties go to the lower index."""
    times = np.asarray(times, dtype=np.float64)
    _check_k(k, times.size)
    return np.sort(np.argsort(times, kind="stable")[:k])


def order_stat_mean(n: int, k: int, rate: float) -> float:
    """Mean of the k-th smallest of n iid Exp(rate) variables."""
    _check_k(k, n)
    if not rate > 0:
        raise ValueError("rate must be positive")
    i = np.arange(n - k + 1, n + 1, dtype=np.float64)
    return float(np.sum(1.0 / i)) / rate


def order_stat_variance(n: int, k: int, rate: float) -> float:
    # Renyi representation: X_(k) is a sum of independent Exp(rate * i) spacings.
    _check_k(k, n)
    if not rate > 0:
        raise ValueError("rate must be positive")
    i = np.arange(n - k + 1, n + 1, dtype=np.float64)
    return float(np.sum(1.0 / i**2)) / rate**2
