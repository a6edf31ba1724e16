"""Simulated master/worker loop for fastest-k SGD."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controller import AdaptiveController, ControllerConfig
from .numerics import DataSet, LinearRegression, LogisticRegression, apply_update
from .stragglers import ResponseDistribution, fastest_k_indices, kth_smallest, sample_response_times

LOSS_FAMILIES = ("linreg", "logreg")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated run.

    ``mode`` is ``"fixed"`` (uses ``k``) or ``"adaptive"`` (uses ``controller``).
    ``reg`` is the logistic-regression penalty and is unrelated to the
    straggler ``rate``.
    """

    n: int
    eta: float
    max_iterations: int
    mode: str = "fixed"
    k: int | None = None
    controller: ControllerConfig | None = None
    straggler: ResponseDistribution = field(default_factory=ResponseDistribution)
    loss: str = "linreg"
    reg: float = 0.0
    seed: int = 0
    loss_eval_cadence: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.loss_eval_cadence < 1:
            raise ValueError("loss_eval_cadence must be >= 1")
        if self.loss not in LOSS_FAMILIES:
            raise ValueError(f"unknown loss family {self.loss!r}")
        if self.reg < 0:
            raise ValueError("reg must be nonnegative")
        if self.mode == "fixed":
            if self.k is None or not 1 <= self.k <= self.n:
                raise ValueError(f"fixed mode needs 1 <= k <= n={self.n}")
            if self.controller is not None:
                raise ValueError("fixed mode takes no controller")
        elif self.mode == "adaptive":
            if self.controller is None:
                raise ValueError("adaptive mode needs a controller config")
            if self.controller.k_max > self.n:
                raise ValueError("controller k_max exceeds n")
            if self.k is not None:
                raise ValueError("adaptive mode takes no fixed k")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    def family(self):
        return LinearRegression() if self.loss == "linreg" else LogisticRegression(self.reg)

    @property
    def initial_k(self) -> int:
        return self.k if self.mode == "fixed" else self.controller.k_init


@dataclass(frozen=True)
class TraceRecord:
    j: int
    t: float
    k: int
    loss: float | None
    download: int
    upload: int


def partition_data(data: DataSet, n: int) -> list[slice]:
    """Contiguous equal row blocks, one per worker."""
    if n < 1:
        raise ValueError("n must be positive")
    if data.m % n:
        raise ValueError(f"n={n} does not divide m={data.m}")
    s = data.m // n
    return [slice(i * s, (i + 1) * s) for i in range(n)]


def aggregate_gradient(blocks, family, model, workers) -> np.ndarray:
    """Average of the partial gradients of the given workers' blocks."""
    g = family.partial_gradient(blocks[workers[0]], model)
    for i in workers[1:]:
        g = g + family.partial_gradient(blocks[i], model)
    return g / len(workers)


def run_with_model(config: ExperimentConfig, data: DataSet, model=None):
    """Run the simulation; return ``(trace, final_model)``."""
    family = config.family()
    blocks = [data.subset(sl) for sl in partition_data(data, config.n)]
    if model is None:
        model = family.init_model(data.d)
    rng = np.random.default_rng(config.seed)
    controller = AdaptiveController(config.controller) if config.mode == "adaptive" else None
    k = config.initial_k
    t, download, upload = 0.0, 0, 0
    trace = []
    J = config.max_iterations
    for j in range(1, J + 1):
        times = sample_response_times(config.straggler, config.n, rng)
        workers = fastest_k_indices(times, k)
        t += kth_smallest(times, k)
        g = aggregate_gradient(blocks, family, model, workers)
        model = apply_update(model, g, config.eta)
        download += k
        upload += config.n
        loss = family.loss(data, model) if (j % config.loss_eval_cadence == 0 or j == J) else None
        trace.append(TraceRecord(j, t, k, loss, download, upload))
        if controller is not None:
            controller.observe(g)
            k = controller.k
    return trace, model


def run(config: ExperimentConfig, data: DataSet) -> list[TraceRecord]:
    return run_with_model(config, data)[0]


def _first_reaching(trace, target_loss):
    for rec in trace:
        if rec.loss is not None and rec.loss <= target_loss:
            return rec
    return None


def time_to_target(trace, target_loss: float) -> float | None:
    """Earliest wall-clock time at which the recorded loss is <= ``target_loss``."""
    if not trace:
        raise ValueError("empty trace")
    rec = _first_reaching(trace, target_loss)
    return None if rec is None else rec.t


def comm_to_target(trace, target_loss: float) -> tuple[int, int] | None:
    """``(download, download + upload)`` units spent when the target is first reached."""
    if not trace:
        raise ValueError("empty trace")
    rec = _first_reaching(trace, target_loss)
    return None if rec is None else (rec.download, rec.download + rec.upload)


def stationary_level(trace, fraction: float = 0.1) -> float:
    """Median recorded loss over the final ``fraction`` of the trace."""
    losses = [r.loss for r in trace[int(len(trace) * (1 - fraction)):] if r.loss is not None]
    if not losses:
        raise ValueError("no loss evaluations in the tail of the trace")
    return float(np.median(losses))
