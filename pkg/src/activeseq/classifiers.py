"""Class-probability predictors used to build ``Q(z|s)``.

Both models follow the same prequential contract: ``predict_proba`` only
reflects the initialization set plus the examples passed to ``update`` so far,
and the engine always predicts before it updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import expit

__all__ = [
    "LabeledExample",
    "ClassifierConfig",
    "ClassifierError",
    "LogisticModel",
    "KNNModel",
    "fit",
    "class_probabilities",
]


class ClassifierError(ValueError):
    """Bad training data or a feature of the wrong dimension."""


@dataclass(frozen=True)
class LabeledExample:
    feature: np.ndarray
    label: int


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "logistic"
    # logistic: full-batch gradient descent, warm-started on every update
    epochs: int = 20
    init_epochs: int = 200
    step_size: float = 0.1
    l2: float = 0.1
    # knn: None -> max(1, round(sqrt(training_size)))
    n_neighbors: Optional[int] = None
    clip_epsilon: float = 1e-3
    standardize: bool = False

    def __post_init__(self):
        if self.kind not in ("logistic", "knn"):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if not 0.0 < self.clip_epsilon < 0.5:
            raise ValueError("clip_epsilon must lie in (0, 0.5)")
        if self.epochs < 0 or self.init_epochs < 0:
            raise ValueError("epoch counts must be non-negative")
        if self.n_neighbors is not None and self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")


def class_probabilities(p1):
    """``(Q(Z=0|s), Q(Z=1|s))``; the pair sums to one exactly."""
    return 1.0 - p1, p1


class _Buffer:
    """Growable (features, labels) store."""

    def __init__(self, X: np.ndarray, y: np.ndarray):
        n, d = X.shape
        cap = max(16, 2 * n)
        self._X = np.empty((cap, d))
        self._y = np.empty(cap)
        self._X[:n] = X
        self._y[:n] = y
        self.n = n

    def append(self, x: np.ndarray, label: int) -> None:
        if self.n == len(self._y):
            cap = 2 * len(self._y)
            X = np.empty((cap, self._X.shape[1]))
            y = np.empty(cap)
            X[: self.n] = self._X[: self.n]
            y[: self.n] = self._y[: self.n]
            self._X, self._y = X, y
        self._X[self.n] = x
        self._y[self.n] = label
        self.n += 1

    @property
    def X(self) -> np.ndarray:
        return self._X[: self.n]

    @property
    def y(self) -> np.ndarray:
        return self._y[: self.n]


class _BaseModel:
    kind = ""

    def __init__(self, X: np.ndarray, y: np.ndarray, config: ClassifierConfig):
        self.config = config
        self.dim = X.shape[1]
        if config.standardize:
            self.center = X.mean(axis=0)
            scale = X.std(axis=0)
            self.scale = np.where(scale > 0, scale, 1.0)
        else:
            self.center = np.zeros(self.dim)
            self.scale = np.ones(self.dim)
        self._data = _Buffer(self._transform(X), y)

    @property
    def training_size(self) -> int:
        return self._data.n

    def _transform(self, X: np.ndarray) -> np.ndarray:
        if not self.config.standardize:
            return X
        return (X - self.center) / self.scale

    def _check(self, X) -> tuple[np.ndarray, bool]:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.dim:
            raise ClassifierError(
                f"feature dimension {X.shape[1]} does not match model dimension {self.dim}"
            )
        return X, single

    def _raw_proba(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_proba(self, X):
        """Clipped ``Q(Z=1|s)`` for one feature vector or a batch of them."""
        X, single = self._check(X)
        eps = self.config.clip_epsilon
        p = np.clip(self._raw_proba(self._transform(X)), eps, 1.0 - eps)
        return float(p[0]) if single else p

    def _refit(self) -> None:
        pass

    def update(self, example: LabeledExample):
        X, _ = self._check(example.feature)
        self._data.append(self._transform(X)[0], example.label)
        self._refit()
        return self


class LogisticModel(_BaseModel):
    kind = "logistic"

    def __init__(self, X, y, config):
        super().__init__(X, y, config)
        self.weights = np.zeros(self.dim)
        self.bias = 0.0
        self._descend(config.init_epochs)

    def _descend(self, epochs: int) -> None:
        X, y = self._data.X, self._data.y
        n = len(y)
        lr, l2 = self.config.step_size, self.config.l2
        w, b = self.weights, self.bias
        r = np.empty(n)
        for _ in range(epochs):
            np.dot(X, w, out=r)
            r += b
            expit(r, out=r)
            r -= y
            grad_w = X.T @ r / n
            if l2:
                grad_w += l2 * w
            w = w - lr * grad_w
            b = b - lr * r.sum() / n
        self.weights, self.bias = w, b

    def _raw_proba(self, X):
        return expit(X @ self.weights + self.bias)

    def _refit(self):
        self._descend(self.config.epochs)


class KNNModel(_BaseModel):
    kind = "knn"

    def __init__(self, X, y, config):
        super().__init__(X, y, config)
        self._tree = None

    @property
    def n_neighbors(self) -> int:
        if self.config.n_neighbors is not None:
            k = self.config.n_neighbors
        else:
            k = max(1, int(math.floor(math.sqrt(self.training_size) + 0.5)))
        return min(k, self.training_size)

    def _refit(self):
        self._tree = None

    def _raw_proba(self, X):
        S, y = self._data.X, self._data.y
        k = self.n_neighbors
        if k == len(y):
            return np.full(len(X), y.mean())
        if self._tree is None:
            self._tree = cKDTree(S)
        # Ask for one neighbour more than needed: if the k-th and (k+1)-th
        # distances differ the k nearest form a unique set; otherwise the row
        # goes through the exact tie-breaking path.
        dist, idx = self._tree.query(X, k=k + 1)
        out = y[idx[:, :k]].mean(axis=1)
        tied = dist[:, k - 1] == dist[:, k]
        if tied.any():
            out[tied] = self._brute(X[tied], S, y, k)
        return out

    @staticmethod
    def _brute(X, S, y, k):
        """Exact neighbour vote; distance ties broken by lower stored index."""
        D = ((X[:, None, :] - S[None, :, :]) ** 2).sum(axis=-1)
        kth = np.partition(D, k - 1, axis=1)[:, k - 1 : k]
        closer = D < kth
        tied = D == kth
        need = k - closer.sum(axis=1, keepdims=True)
        take = closer | (tied & (np.cumsum(tied, axis=1) <= need))
        return (take * y).sum(axis=1) / k


def fit(examples: Sequence[LabeledExample], config: ClassifierConfig = ClassifierConfig()):
    """Initialize a model from labeled examples (deterministic)."""
    if len(examples) == 0:
        raise ClassifierError("cannot initialize a classifier from zero examples")
    dims = {np.asarray(e.feature).shape for e in examples}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise ClassifierError(f"inconsistent feature dimensions: {sorted(dims)}")
    X = np.array([np.asarray(e.feature, dtype=float) for e in examples])
    y = np.array([e.label for e in examples], dtype=float)
    if not np.isin(y, (0.0, 1.0)).all():
        raise ClassifierError("labels must be 0 or 1")
    cls = LogisticModel if config.kind == "logistic" else KNNModel
    return cls(X, y, config)
