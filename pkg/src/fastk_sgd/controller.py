"""Sign-of-inner-product phase detector that decides when to wait for more workers.

Consecutive aggregated gradients that point the same way indicate the
transient phase; once negative products outnumber positive ones by more
than ``thresh`` (and at least ``burnin`` iterations have passed since the
last change), the controller increases k.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class ControllerConfig:
    """Adaptation parameters.

    Exactly one of ``step`` (additive, k <- k + step) and ``factor``
    (multiplicative, k <- k * factor) is set.
    """

    thresh: int
    burnin: int
    k_init: int
    k_max: int
    step: int | None = None
    factor: int | None = None

    def __post_init__(self):
        if (self.step is None) == (self.factor is None):
            raise ValueError("set exactly one of step or factor")
        if self.step is not None and self.step < 1:
            raise ValueError("step must be a positive integer")
        if self.factor is not None and self.factor < 2:
            raise ValueError("factor must be an integer >= 2")
        if self.thresh < 1:
            raise ValueError("thresh must be positive")
        if self.burnin < 0:
            raise ValueError("burnin must be nonnegative")
        if not 1 <= self.k_init <= self.k_max:
            raise ValueError("need 1 <= k_init <= k_max")

    def next_k(self, k: int) -> int:
        return k + self.step if self.step is not None else k * self.factor

    def to_dict(self) -> dict:
        return {key: v for key, v in asdict(self).items() if v is not None}


@dataclass
class ControllerState:
    k: int
    count_negative: int = 0
    count_iter: int = 1
    prev_gradient: np.ndarray | None = None

    @classmethod
    def initial(cls, cfg: ControllerConfig) -> "ControllerState":
        return cls(k=cfg.k_init)


def observe(state: ControllerState, g: np.ndarray, cfg: ControllerConfig) -> bool:
    """Feed one aggregated gradient; update ``state`` in place.

    Returns True when k was increased. The new k applies to the next iteration.
    """
    g = np.asarray(g, dtype=np.float64)
    if state.prev_gradient is not None:
        if g.shape != state.prev_gradient.shape:
            raise ValueError(f"gradient length {g.size} != previous {state.prev_gradient.size}")
        if float(g @ state.prev_gradient) < 0:
            state.count_negative += 1
        else:
            state.count_negative -= 1
    switched = False
    k_new = cfg.next_k(state.k)
    if state.count_negative > cfg.thresh and state.count_iter > cfg.burnin and k_new <= cfg.k_max:
        state.k = k_new
        state.count_negative = 0
        state.count_iter = 0
        switched = True
    state.count_iter += 1
    state.prev_gradient = g.copy()
    return switched


def current_k(state: ControllerState) -> int:
    return state.k


class AdaptiveController:
    """Owns a config and its state; convenience wrapper for the simulator."""

    def __init__(self, cfg: ControllerConfig):
        self.cfg = cfg
        self.state = ControllerState.initial(cfg)

    @property
    def k(self) -> int:
        return self.state.k

    def observe(self, g: np.ndarray) -> bool:
        return observe(self.state, g, self.cfg)
