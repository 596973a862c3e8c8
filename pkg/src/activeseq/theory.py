"""Exact information-theoretic quantities on discrete scenarios.

All logarithms are natural (nats).  A discrete scenario is a finite support
of feature cells, each with a class posterior ``P(Z=0|s_i)`` and a mass
``G(s_i)``; every expectation below is an exact weighted sum over the
``(s_i, z)`` outcomes, never a sample average.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

__all__ = [
    "DiscreteScenario",
    "PowerBoundInputs",
    "MISolution",
    "binary_entropy",
    "mutual_information",
    "estimate_conditional_mi",
    "kl_squared",
    "kl_divergence",
    "relative_entropy_variance",
    "information_density",
    "normal_cdf",
    "power_lower_bound",
    "power_bound_argument",
    "mi_max_lp",
    "bimodal_closed_form",
    "welch_t_test",
    "partition_power_inputs",
    "InfiniteDivergenceError",
    "InfeasibleError",
]


class InfiniteDivergenceError(ValueError):
    """A log-ratio is infinite (posterior at 0 or 1 where the other is not)."""


class InfeasibleError(ValueError):
    pass


@dataclass
class DiscreteScenario:
    cells: np.ndarray  # P(Z=0|s_i)
    weights: np.ndarray  # G(s_i)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.cells.shape != self.weights.shape or self.cells.ndim != 1:
            raise ValueError("cells and weights must be 1-D arrays of equal length")
        if len(self.cells) < 2:
            raise ValueError("a discrete scenario needs at least two support points")
        if np.any((self.cells < 0) | (self.cells > 1)):
            raise ValueError("posteriors must lie in [0, 1]")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to one")

    @property
    def prior0(self) -> float:
        return float(self.weights @ self.cells)

    @property
    def mutual_information(self) -> float:
        return mutual_information(self.cells, self.weights)


@dataclass(frozen=True)
class PowerBoundInputs:
    alpha: float
    budget: int
    mi: float
    delta: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        for name in ("mi", "delta", "eps1", "eps2", "sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class MISolution:
    scenario: DiscreteScenario
    mi: float
    degenerate: bool = False

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.scenario.weights > 0)


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    return special.xlogy(p, p)


def binary_entropy(p):
    """``H(p)`` in nats, with ``0 log 0 = 0``."""
    out = -(_xlogx(p) + _xlogx(1.0 - np.asarray(p, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def mutual_information(cells, weights) -> float:
    """``I(S;Z) = H(Z) - H(Z|S)`` for posteriors ``P(Z=0|s)`` and masses ``G(s)``."""
    cells = np.asarray(cells, dtype=float)
    weights = np.asarray(weights, dtype=float)
    return float(binary_entropy(weights @ cells) - weights @ binary_entropy(cells))


def estimate_conditional_mi(cell_prior: float, q_values) -> float:
    """Plug-in estimate of ``I(S;Z|A)`` from a cell prior and model posteriors.

    ``q_values`` are ``Q(Z=0|s)`` for the pool features inside the cell.  The
    result is not clamped at zero: with a misspecified ``Q`` it can be negative,
    which is harmless since it is only ranked.
    """
    q = np.asarray(q_values, dtype=float)
    if q.size == 0:
        raise ValueError("cannot estimate MI from an empty cell")
    if not 0.0 <= cell_prior <= 1.0:
        raise ValueError("cell prior must lie in [0, 1]")
    return float(binary_entropy(cell_prior) - np.mean(binary_entropy(q)))


def _joint(posteriors):
    """Stack posteriors P(Z=0|s) into an (L, 2) table of P(z|s)."""
    p0 = np.asarray(posteriors, dtype=float)
    return np.stack([p0, 1.0 - p0], axis=1)


def _log_ratio(num, den):
    """log(num/den) elementwise; raises on 0-vs-nonzero disagreements."""
    bad = ((num == 0) | (den == 0)) & (num != den)
    if np.any(bad):
        raise InfiniteDivergenceError("posterior at 0 or 1 where the other distribution is not")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(num == den, 0.0, np.log(num) - np.log(den))


def kl_squared(direction: str, true_posteriors, model_posteriors, weights) -> float:
    """Second moment of the log-likelihood ratio between ``p(s,z)`` and ``q(s,z)``.

    ``q_from_p``: ``E_p[log^2(Q/P)]``; ``p_from_q``: ``E_q[log^2(P/Q)]``.  Both
    joints share the feature marginal ``weights``.
    """
    P, Q = _joint(true_posteriors), _joint(model_posteriors)
    w = np.asarray(weights, dtype=float)[:, None]
    sq = _log_ratio(Q, P) ** 2
    if direction == "q_from_p":
        return float(np.sum(w * P * sq))
    if direction == "p_from_q":
        return float(np.sum(w * Q * sq))
    raise ValueError(f"unknown direction {direction!r}")


def kl_divergence(true_posteriors, model_posteriors, weights) -> float:
    """Conditional ``KL(P(z|s) || Q(z|s))`` averaged over ``weights``."""
    P, Q = _joint(true_posteriors), _joint(model_posteriors)
    w = np.asarray(weights, dtype=float)[:, None]
    return float(np.sum(w * P * _log_ratio(P, Q)))


def information_density(posteriors, prior0: float):
    """``log P(z|s)/P(z)`` on the (L, 2) outcome grid; zero where ``P(z|s) = 0``."""
    P = _joint(posteriors)
    prior = np.array([prior0, 1.0 - prior0])
    with np.errstate(divide="ignore"):
        return np.where(P > 0, np.log(np.where(P > 0, P, 1.0)) - np.log(prior), 0.0)


def relative_entropy_variance(priors, posteriors, weights) -> float:
    """Variance of the information density under ``p(s,z)``.

    ``priors`` is ``P(Z=0)``; pass ``None`` to use the marginal implied by the
    posteriors and weights.
    """
    w = np.asarray(weights, dtype=float)
    post = np.asarray(posteriors, dtype=float)
    prior0 = float(w @ post) if priors is None else float(np.ravel(priors)[0])
    dens = information_density(post, prior0)
    mass = w[:, None] * _joint(post)
    mean = np.sum(mass * dens)
    return float(np.sum(mass * (dens - mean) ** 2))


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def power_bound_argument(kind: str, inputs: PowerBoundInputs) -> float:
    """The standardized drift fed to the normal CDF in :func:`power_lower_bound`.

    Useful for comparisons: the CDF rounds to exactly 0 or 1 in double
    precision long before the arguments stop being distinguishable.
    """
    a = inputs
    denom_sq = a.eps1 + a.sigma ** 2 + 2.0 * a.sigma * math.sqrt(a.eps1)
    if denom_sq <= 0.0:
        raise ValueError("degenerate inputs: eps1 + sigma^2 + 2 sigma sqrt(eps1) must be > 0")
    if kind == "proposed":
        drift = a.mi + a.delta - 2.0 * math.sqrt(a.eps1) - math.sqrt(a.eps2)
    elif kind == "baseline":
        drift = a.mi - math.sqrt(a.eps1)
    else:
        raise ValueError(f"unknown bound kind {kind!r}")
    root = math.sqrt(a.budget)
    return (math.log(a.alpha) / root + root * drift) / math.sqrt(denom_sq)


def power_lower_bound(kind: str, inputs: PowerBoundInputs) -> float:
    """Approximate power lower bound for the partition test or the random baseline."""
    return normal_cdf(power_bound_argument(kind, inputs))


def _mi_from_weights(cells, weights, u):
    return float(binary_entropy(u) - weights @ binary_entropy(cells))


def mi_max_lp(cells, u: float, tol: float = 1e-12) -> MISolution:
    """Maximize ``I(S;Z)`` over masses ``G`` with ``sum G P(Z=0|s) = u``.

    The objective is linear in ``G`` once the class prior is pinned at ``u``,
    and the feasible set has two equality constraints, so every vertex has at
    most two non-zero masses.  We enumerate all of them.
    """
    cells = np.asarray(cells, dtype=float)
    L = len(cells)
    if L < 2:
        raise ValueError("need at least two cells")
    if u < cells.min() - tol or u > cells.max() + tol:
        raise InfeasibleError(f"prior u={u} outside [{cells.min()}, {cells.max()}]")
    H = binary_entropy(cells)
    best_val, best_w = math.inf, None
    for i in range(L):
        if abs(cells[i] - u) <= tol and H[i] < best_val:
            w = np.zeros(L)
            w[i] = 1.0
            best_val, best_w = H[i], w
    for i, j in itertools.combinations(range(L), 2):
        gap = cells[i] - cells[j]
        if gap == 0.0:
            continue
        # a subnormal gap can overflow to +-inf; that vertex is then simply infeasible
        with np.errstate(over="ignore"):
            gi = (u - cells[j]) / gap
        if gi < -tol or gi > 1.0 + tol:
            continue
        gi = min(max(gi, 0.0), 1.0)
        val = gi * H[i] + (1.0 - gi) * H[j]
        if val < best_val - 1e-15:
            w = np.zeros(L)
            w[i], w[j] = gi, 1.0 - gi
            best_val, best_w = val, w
    if best_w is None:
        raise InfeasibleError(f"no feasible vertex for u={u}")
    return MISolution(DiscreteScenario(cells, best_w), float(binary_entropy(u) - best_val))


def bimodal_closed_form(cells, u: float) -> MISolution:
    """Mass only on the two extreme posteriors, split to hit the prior ``u``."""
    cells = np.asarray(cells, dtype=float)
    i0, i1 = int(np.argmax(cells)), int(np.argmin(cells))
    p0, p1 = cells[i0], cells[i1]
    w = np.zeros(len(cells))
    if p0 == p1:
        if u != p0:
            raise InfeasibleError(f"prior u={u} unreachable: all posteriors equal {p0}")
        w[:2] = 0.5
        return MISolution(DiscreteScenario(cells, w), 0.0, degenerate=True)
    if not p1 <= u <= p0:
        raise InfeasibleError(f"prior u={u} outside [{p1}, {p0}]")
    w[i0] = (u - p1) / (p0 - p1)
    w[i1] = (p0 - u) / (p0 - p1)
    return MISolution(DiscreteScenario(cells, w), _mi_from_weights(cells, w, u))


def welch_t_test(sample_a, sample_b):
    """Unequal-variance two-sample t-test; returns ``(t, two-sided p)``."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    se2 = va + vb
    if se2 == 0.0:
        raise ValueError("both samples have zero variance")
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    # Welch-Satterthwaite, written in variance shares so tiny variances cannot underflow
    ra, rb = va / se2, vb / se2
    df = 1.0 / (ra ** 2 / (len(a) - 1) + rb ** 2 / (len(b) - 1))
    # two-sided tail of Student's t via the regularized incomplete beta
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return float(t), min(p, 1.0)


def partition_power_inputs(scenario: DiscreteScenario, model_posteriors, cells: Sequence,
                           alpha: float, budget: int) -> PowerBoundInputs:
    """Compute ``I``, ``Delta``, ``eps1``, ``eps2`` and ``sigma`` for a partition.

    ``cells`` lists the support indices that make up each partition cell.
    """
    Q = np.asarray(model_posteriors, dtype=float)
    mi = scenario.mutual_information
    cell_mi, eps1, eps2, var = [], [], [], [relative_entropy_variance(None, scenario.cells,
                                                                      scenario.weights)]
    for members in cells:
        members = np.asarray(members, dtype=int)
        w = scenario.weights[members] / scenario.weights[members].sum()
        post = scenario.cells[members]
        cell_mi.append(mutual_information(post, w))
        eps1.append(kl_squared("q_from_p", post, Q[members], w))
        eps2.append(kl_squared("p_from_q", post, Q[members], w))
        var.append(relative_entropy_variance(None, post, w))
    # the bound presumes a non-negative gain; floor it there
    return PowerBoundInputs(alpha=alpha, budget=budget, mi=mi,
                            delta=max(0.0, max(cell_mi) - mi), eps1=max(eps1),
                            eps2=max(eps2), sigma=math.sqrt(max(var)))
