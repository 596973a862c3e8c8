"""Scenario generators and CSV ingestion.

Every generator draws the hidden label first and then the feature from a
class-conditional distribution, so null scenarios (``delta == 0``,
``mixture_ratio == 1``) have features independent of labels by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .query import Pool

__all__ = [
    "GaussianScenario",
    "MixtureScenario",
    "DiscreteFeatureScenario",
    "IngestionError",
    "gen_gaussian_pool",
    "gen_mixture_pool",
    "gen_discrete_pool",
    "load_csv_pool",
    "write_csv_pool",
    "gaussian_cell_priors",
]


class IngestionError(ValueError):
    pass


def _draw_labels(prior0: float, size: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(size) >= prior0).astype(np.int8)


@dataclass(frozen=True)
class GaussianScenario:
    """Class 0 ~ N((-delta, 0, ...), I), class 1 ~ N((+delta, 0, ...), I)."""

    delta: float = 0.0
    prior0: float = 0.5
    dim: int = 2
    pool_size: int = 2000

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not 0.0 < self.prior0 < 1.0:
            raise ValueError("prior0 must lie in (0, 1)")
        if self.dim < 1 or self.pool_size < 1:
            raise ValueError("dim and pool_size must be positive")

    @property
    def is_null(self) -> bool:
        return self.delta == 0.0

    def generate(self, rng: np.random.Generator) -> Pool:
        return gen_gaussian_pool(self, rng)


def gen_gaussian_pool(scenario: GaussianScenario, rng: np.random.Generator) -> Pool:
    z = _draw_labels(scenario.prior0, scenario.pool_size, rng)
    X = rng.standard_normal((scenario.pool_size, scenario.dim))
    X[:, 0] += np.where(z == 1, scenario.delta, -scenario.delta)
    return Pool(X, z)


def gaussian_cell_priors(scenario: GaussianScenario, boundaries: Sequence[float]) -> list:
    """Exact ``P(Z=0 | x_0 in cell)`` for cells cut at ``boundaries`` on coordinate 0."""
    edges = np.concatenate([[-np.inf], np.sort(np.asarray(boundaries, float)), [np.inf]])
    pi0, d = scenario.prior0, scenario.delta
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m0 = pi0 * (norm.cdf(hi + d) - norm.cdf(lo + d))
        m1 = (1 - pi0) * (norm.cdf(hi - d) - norm.cdf(lo - d))
        out.append(float(m0 / (m0 + m1)))
    return out


def _default_means():
    return ((0.0, 0.0), (1.5, 0.0), (0.0, 1.5))


@dataclass(frozen=True)
class MixtureScenario:
    """Two-sample contamination design on isotropic Gaussian clusters.

    Per pool, two distinct clusters A and B are picked at random from
    ``means``.  Label-0 items come from A; label-1 items come from A with
    probability ``mixture_ratio`` and from B otherwise.
    """

    means: tuple = field(default_factory=_default_means)
    mixture_ratio: float = 0.7
    prior0: float = 0.5
    pool_size: int = 2000
    scale: float = 1.0

    def __post_init__(self):
        if len(self.means) < 2:
            raise ValueError("need at least two cluster means")
        if len({len(m) for m in self.means}) != 1:
            raise ValueError("cluster means must share a dimension")
        if not 0.0 <= self.mixture_ratio <= 1.0:
            raise ValueError("mixture_ratio must lie in [0, 1]")
        if not 0.0 < self.prior0 < 1.0:
            raise ValueError("prior0 must lie in (0, 1)")

    @property
    def is_null(self) -> bool:
        return self.mixture_ratio == 1.0

    @property
    def dim(self) -> int:
        return len(self.means[0])

    def generate(self, rng: np.random.Generator) -> Pool:
        return gen_mixture_pool(self, rng)


def gen_mixture_pool(scenario: MixtureScenario, rng: np.random.Generator,
                     return_components: bool = False):
    means = np.asarray(scenario.means, dtype=float)
    a, b = rng.choice(len(means), size=2, replace=False)
    n = scenario.pool_size
    z = _draw_labels(scenario.prior0, n, rng)
    from_b = (z == 1) & (rng.random(n) >= scenario.mixture_ratio)
    centers = np.where(from_b[:, None], means[b], means[a])
    X = centers + scenario.scale * rng.standard_normal((n, means.shape[1]))
    pool = Pool(X, z)
    return (pool, from_b) if return_components else pool


@dataclass(frozen=True)
class DiscreteFeatureScenario:
    """Finite feature support: point ``i`` sits at ``positions[i]`` on a line.

    ``posteriors[i]`` is ``P(Z=0|s_i)`` and ``weights[i]`` its mass.  Used to
    run the engine on scenarios whose information quantities are exact.
    """

    posteriors: tuple
    weights: tuple
    positions: tuple = None
    pool_size: int = 2000

    def __post_init__(self):
        if len(self.posteriors) != len(self.weights):
            raise ValueError("posteriors and weights differ in length")
        if not math.isclose(sum(self.weights), 1.0, abs_tol=1e-9):
            raise ValueError("weights must sum to one")

    @property
    def support_positions(self) -> np.ndarray:
        if self.positions is None:
            return np.arange(len(self.posteriors), dtype=float)
        return np.asarray(self.positions, dtype=float)

    @property
    def is_null(self) -> bool:
        return len(set(self.posteriors)) == 1

    def generate(self, rng: np.random.Generator) -> Pool:
        return gen_discrete_pool(self, rng)


def gen_discrete_pool(scenario: DiscreteFeatureScenario, rng: np.random.Generator,
                      return_support: bool = False):
    n = scenario.pool_size
    w = np.asarray(scenario.weights, dtype=float)
    point = rng.choice(len(w), size=n, p=w / w.sum())
    post0 = np.asarray(scenario.posteriors, dtype=float)[point]
    z = (rng.random(n) >= post0).astype(np.int8)
    X = scenario.support_positions[point][:, None]
    pool = Pool(X, z)
    return (pool, point) if return_support else pool


def load_csv_pool(path, label_column: str = "z") -> Pool:
    """Read a header-first CSV; every other column becomes a feature coordinate."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise IngestionError(f"{path}: no label column {label_column!r} in header")
        li = header.index(label_column)
        features, labels = [], []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(f"{path}: row {row_no} has {len(row)} fields, "
                                     f"expected {len(header)}")
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise IngestionError(f"{path}: non-numeric value in row {row_no}") from None
            if values[li] not in (0.0, 1.0):
                raise IngestionError(f"{path}: row {row_no}: label {row[li]!r} is not 0 or 1")
            labels.append(int(values[li]))
            features.append(values[:li] + values[li + 1:])
    if not features:
        raise IngestionError(f"{path}: no data rows")
    return Pool(np.array(features), np.array(labels))


def write_csv_pool(pool: Pool, path) -> None:
    """Dump features and hidden labels as ``f0,...,f{d-1},z`` (repr floats, exact)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{j}" for j in range(pool.dim)] + ["z"])
        for x, z in zip(pool.features, pool.hidden_labels):
            w.writerow([repr(float(v)) for v in x] + [int(z)])
