"""Losses, gradients and model containers.

Two problem families are supported: least-squares linear regression and
ten-class one-vs-rest logistic regression with an l2 penalty on the weights.
Every gradient is returned as a flat float64 vector so that the
master can average, update and take inner products without caring which
family produced it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_CLASSES = 10


@dataclass(frozen=True)
class DataSet:
    """Row-major feature matrix with one label per row."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {features.shape}")
        m, d = features.shape
        if m < 1 or d < 1:
            raise ValueError(f"dataset must have m >= 1 and d >= 1, got {features.shape}")
        if labels.shape != (m,):
            raise ValueError(f"expected {m} labels, got shape {labels.shape}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "DataSet":
        return DataSet(self.features[rows], self.labels[rows])


@dataclass(frozen=True)
class LinearModel:
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise ValueError("model has non-finite entries")
        object.__setattr__(self, "w", w)

    @classmethod
    def zeros(cls, d: int) -> "LinearModel":
        return cls(np.zeros(d))

    @property
    def size(self) -> int:
        return self.w.size

    def flat(self) -> np.ndarray:
        return self.w

    def with_flat(self, params: np.ndarray) -> "LinearModel":
        return LinearModel(params)


@dataclass(frozen=True)
class LogisticModel:
    """One weight row and one bias per digit class."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        if W.ndim != 2 or W.shape[0] != NUM_CLASSES or b.shape != (NUM_CLASSES,):
            raise ValueError(f"expected W of shape (10, d) and b of length 10, got {W.shape}, {b.shape}")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ValueError("model has non-finite entries")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @classmethod
    def zeros(cls, d: int) -> "LogisticModel":
        return cls(np.zeros((NUM_CLASSES, d)), np.zeros(NUM_CLASSES))

    @property
    def d(self) -> int:
        return self.W.shape[1]

    @property
    def size(self) -> int:
        return self.W.size + self.b.size

    def flat(self) -> np.ndarray:
        # W row-major, then b
        return np.concatenate([self.W.reshape(-1), self.b])

    def with_flat(self, params: np.ndarray) -> "LogisticModel":
        params = np.asarray(params, dtype=np.float64)
        if params.size != self.size:
            raise ValueError(f"parameter length {params.size} != model size {self.size}")
        nw = self.W.size
        return LogisticModel(params[:nw].reshape(self.W.shape), params[nw:])


def _check_linear(data: DataSet, model: LinearModel):
    if data.d != model.size:
        raise ValueError(f"data has d={data.d} but model has {model.size} weights")


def linreg_loss(data: DataSet, model: LinearModel) -> float:
    """Sum over rows of 0.5 * (<x, w> - y)^2."""
    _check_linear(data, model)
    r = data.features @ model.w - data.labels
    return 0.5 * float(r @ r)


def linreg_partial_gradient(subset: DataSet, model: LinearModel) -> np.ndarray:
    """Gradient of the least-squares loss averaged over the rows of `subset`."""
    _check_linear(subset, model)
    r = subset.features @ model.w - subset.labels
    return subset.features.T @ r / subset.m


def sigmoid(z):
    """Standard logistic function, 1 / (1 + exp(-z))."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def _class_targets(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (not np.all(labels == np.round(labels)) or labels.min() < 0 or labels.max() >= NUM_CLASSES):
        raise ValueError("labels must be integers in 0..9")
    return np.eye(NUM_CLASSES)[labels.astype(np.int64)]


def _logits(data: DataSet, model: LogisticModel) -> np.ndarray:
    if data.d != model.d:
        raise ValueError(f"data has d={data.d} but model expects d={model.d}")
    return data.features @ model.W.T + model.b


def _bce_sum(data: DataSet, model: LogisticModel) -> float:
    # log(1 + e^z) - y z equals -[y log s(z) + (1 - y) log(1 - s(z))]
    z = _logits(data, model)
    y = _class_targets(data.labels)
    return float(np.sum(np.logaddexp(0.0, z) - y * z)) / NUM_CLASSES


def logreg_loss(data: DataSet, model: LogisticModel, reg: float = 0.0) -> float:
    """Class-averaged binary cross-entropy summed over samples, plus (reg/2) * ||W||^2.

    The zero model scores ``m * log 2``.
    """
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    return _bce_sum(data, model) + 0.5 * reg * float(np.sum(model.W**2))


def logreg_mean_objective(data: DataSet, model: LogisticModel, reg: float = 0.0) -> float:
    """Per-sample average of the data term plus the penalty.

    This is the function whose gradient :func:`logreg_partial_gradient`
    returns on a given subset.
    """
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    return _bce_sum(data, model) / data.m + 0.5 * reg * float(np.sum(model.W**2))


def logreg_partial_gradient(subset: DataSet, model: LogisticModel, reg: float = 0.0) -> np.ndarray:
    if subset.m == 0:
        raise ValueError("empty subset")
    z = _logits(subset, model)
    y = _class_targets(subset.labels)
    delta = (sigmoid(z) - y) / (NUM_CLASSES * subset.m)
    gW = delta.T @ subset.features + reg * model.W
    gb = delta.sum(axis=0)
    return np.concatenate([gW.reshape(-1), gb])


def logreg_predict(data: DataSet, model: LogisticModel) -> np.ndarray:
    return np.argmax(_logits(data, model), axis=1)


def accuracy(data: DataSet, model: LogisticModel) -> float:
    return float(np.mean(logreg_predict(data, model) == data.labels))


def apply_update(model, gradient: np.ndarray, eta: float):
    """Return a new model with parameters ``p - eta * gradient``."""
    gradient = np.asarray(gradient, dtype=np.float64)
    params = model.flat()
    if gradient.shape != params.shape:
        raise ValueError(f"gradient length {gradient.size} != model size {params.size}")
    return model.with_flat(params - eta * gradient)


class LinearRegression:
    """Problem family wrapper used by the simulator."""

    name = "linreg"

    def init_model(self, d: int) -> LinearModel:
        return LinearModel.zeros(d)

    def loss(self, data: DataSet, model: LinearModel) -> float:
        return linreg_loss(data, model)

    def partial_gradient(self, subset: DataSet, model: LinearModel) -> np.ndarray:
        if subset.m == 0:
            raise ValueError("empty subset")
        return linreg_partial_gradient(subset, model)


class LogisticRegression:
    name = "logreg"

    def __init__(self, reg: float = 0.0):
        if reg < 0:
            raise ValueError("reg must be nonnegative")
        self.reg = reg

    def init_model(self, d: int) -> LogisticModel:
        return LogisticModel.zeros(d)

    def loss(self, data: DataSet, model: LogisticModel) -> float:
        return logreg_loss(data, model, self.reg)

    def partial_gradient(self, subset: DataSet, model: LogisticModel) -> np.ndarray:
        return logreg_partial_gradient(subset, model, self.reg)
