"""Unlabeled pools, label oracles and label-query strategies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np

from .theory import estimate_conditional_mi

__all__ = [
    "Pool",
    "PoolExhaustedError",
    "OracleError",
    "MaskedLabelOracle",
    "Partition",
    "bimodal_pick",
    "select_bimodal",
    "select_random",
    "select_partition_restricted",
    "BimodalQuery",
    "RandomQuery",
    "PartitionQuery",
    "StrategyConfig",
    "make_strategy",
]


class PoolExhaustedError(RuntimeError):
    pass


class OracleError(RuntimeError):
    pass


class Oracle(Protocol):
    def __call__(self, index: int) -> int: ...


@dataclass
class Pool:
    """Unlabeled features; the labels are only reachable through :meth:`oracle`."""

    features: np.ndarray
    hidden_labels: np.ndarray = field(repr=False)
    queried: np.ndarray = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D array (items x dimensions)")
        self.hidden_labels = np.asarray(self.hidden_labels, dtype=np.int8)
        if len(self.hidden_labels) != len(self.features):
            raise ValueError("features and labels differ in length")
        if self.queried is None:
            self.queried = np.zeros(len(self.features), dtype=bool)
        elif len(self.queried) != len(self.features):
            raise ValueError("queried mask has the wrong length")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def unqueried(self) -> np.ndarray:
        return np.flatnonzero(~self.queried)

    def fresh(self) -> "Pool":
        """Same features and labels, nothing queried."""
        return Pool(self.features, self.hidden_labels)

    def mark(self, index: int) -> None:
        if self.queried[index]:
            raise ValueError(f"pool item {index} was already queried")
        self.queried[index] = True

    def oracle(self) -> "MaskedLabelOracle":
        return MaskedLabelOracle(self.hidden_labels)


class MaskedLabelOracle:
    """Programmatic oracle answering from stored ground truth; counts calls."""

    def __init__(self, labels):
        self._labels = np.asarray(labels)
        self.calls = 0

    def __call__(self, index: int) -> int:
        if not 0 <= index < len(self._labels):
            raise OracleError(f"no label for pool index {index}")
        self.calls += 1
        return int(self._labels[index])


@dataclass
class Partition:
    """Disjoint cells of pool indices with class priors ``P(Z=0|cell)``."""

    cells: list
    cell_priors: Sequence[float]

    def __post_init__(self):
        self.cells = [np.asarray(c, dtype=int) for c in self.cells]
        self.cell_priors = [float(p) for p in self.cell_priors]
        if len(self.cells) != len(self.cell_priors):
            raise ValueError("one prior per cell is required")
        if any(not 0.0 <= p <= 1.0 for p in self.cell_priors):
            raise ValueError("cell priors must lie in [0, 1]")

    def validate(self, pool_size: int) -> None:
        joined = np.concatenate(self.cells) if self.cells else np.array([], dtype=int)
        if len(joined) != pool_size or not np.array_equal(np.sort(joined), np.arange(pool_size)):
            raise ValueError("partition cells must cover every pool index exactly once")

    @classmethod
    def along_axis(cls, features, boundaries, axis=0, cell_priors=None, labels=None):
        """Cut the pool at ``boundaries`` on one coordinate.

        Priors are taken from ``cell_priors`` when given, otherwise estimated
        as the class-0 fraction of ``labels`` (an array aligned with the pool
        where unknown entries are negative) inside each cell.
        """
        x = np.asarray(features)[:, axis]
        bins = np.digitize(x, np.sort(np.asarray(boundaries, dtype=float)))
        cells = [np.flatnonzero(bins == b) for b in range(len(boundaries) + 1)]
        if cell_priors is None:
            if labels is None:
                raise ValueError("need either cell priors or labels to estimate them")
            cell_priors = estimate_cell_priors(cells, labels)
        return cls(cells, cell_priors)


def estimate_cell_priors(cells, labels) -> list:
    """Plug-in ``P(Z=0|cell)`` from known labels; ``labels < 0`` means unknown."""
    labels = np.asarray(labels)
    priors = []
    for c in cells:
        known = labels[c][labels[c] >= 0]
        priors.append(float(np.mean(known == 0)) if len(known) else 0.5)
    return priors


def _require_unqueried(pool: Pool) -> np.ndarray:
    free = pool.unqueried
    if len(free) == 0:
        raise PoolExhaustedError("no unqueried items left in the pool")
    return free


def bimodal_pick(q0: np.ndarray, available: np.ndarray, heads: bool) -> int:
    """Heads: argmax ``Q(Z=0|s)``; tails: argmax ``Q(Z=1|s)``. Lowest index wins ties."""
    q0 = np.asarray(q0, dtype=float)
    score = q0 if heads else 1.0 - q0
    masked = np.where(available, score, -np.inf)
    if not np.isfinite(masked).any():
        raise PoolExhaustedError("no unqueried items left in the pool")
    return int(np.argmax(masked))


def select_bimodal(pool: Pool, model, rng: np.random.Generator) -> int:
    _require_unqueried(pool)
    heads = rng.random() < 0.5
    p1 = model.predict_proba(pool.features)
    return bimodal_pick(1.0 - p1, ~pool.queried, heads)


def select_random(pool: Pool, rng: np.random.Generator) -> int:
    free = _require_unqueried(pool)
    return int(free[rng.integers(len(free))])


def cell_mi_estimates(pool: Pool, partition: Partition, model) -> np.ndarray:
    p1 = model.predict_proba(pool.features)
    out = []
    for cell, prior in zip(partition.cells, partition.cell_priors):
        if len(cell) == 0:
            out.append(-np.inf)
            continue
        out.append(estimate_conditional_mi(prior, 1.0 - p1[cell]))
    return np.array(out)


def select_partition_restricted(pool: Pool, partition: Partition, model,
                                rng: np.random.Generator, cell: Optional[int] = None) -> int:
    """Uniform draw from the unqueried part of the highest-estimated-MI cell.

    ``cell`` short-circuits the MI ranking (used when the choice is cached).
    """
    if cell is None:
        cell = int(np.argmax(cell_mi_estimates(pool, partition, model)))
    members = partition.cells[cell]
    free = members[~pool.queried[members]]
    if len(free) == 0:
        raise PoolExhaustedError(f"selected cell {cell} has no unqueried items left")
    return int(free[rng.integers(len(free))])


class BimodalQuery:
    name = "bimodal"

    def select(self, pool, model, rng):
        return select_bimodal(pool, model, rng)


class RandomQuery:
    name = "random"

    def select(self, pool, model, rng):
        return select_random(pool, rng)


class PartitionQuery:
    """Samples from the cell chosen at the first call (or every call if ``refresh``)."""

    name = "partition"

    def __init__(self, partition: Partition, refresh: bool = False):
        self.partition = partition
        self.refresh = refresh
        self.chosen_cell: Optional[int] = None
        self.estimates: Optional[np.ndarray] = None

    def select(self, pool, model, rng):
        if self.chosen_cell is None or self.refresh:
            self.partition.validate(len(pool))
            self.estimates = cell_mi_estimates(pool, self.partition, model)
            self.chosen_cell = int(np.argmax(self.estimates))
        return select_partition_restricted(pool, self.partition, model, rng,
                                           cell=self.chosen_cell)


@dataclass(frozen=True)
class StrategyConfig:
    """``name`` in {bimodal, random, partition}.

    Partition cells come from ``boundaries`` on coordinate ``axis`` or from
    explicit ``cells``; priors from ``cell_priors`` or, if absent, from the
    initialization labels.
    """

    name: str = "bimodal"
    axis: int = 0
    boundaries: tuple = ()
    cells: Optional[tuple] = None
    cell_priors: Optional[tuple] = None
    refresh: bool = False

    def __post_init__(self):
        if self.name not in ("bimodal", "random", "partition"):
            raise ValueError(f"unknown query strategy {self.name!r}")


def make_strategy(config: StrategyConfig, pool: Pool, init_indices=(), init_labels=()):
    if config.name == "bimodal":
        return BimodalQuery()
    if config.name == "random":
        return RandomQuery()
    known = np.full(len(pool), -1)
    known[np.asarray(init_indices, dtype=int)] = np.asarray(init_labels, dtype=int)
    if config.cells is not None:
        cells = [np.asarray(c, dtype=int) for c in config.cells]
        priors = config.cell_priors or estimate_cell_priors(cells, known)
        partition = Partition(cells, priors)
    else:
        partition = Partition.along_axis(pool.features, config.boundaries, config.axis,
                                         cell_priors=config.cell_priors, labels=known)
    return PartitionQuery(partition, refresh=config.refresh)
