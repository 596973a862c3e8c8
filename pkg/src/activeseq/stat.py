"""Sequential likelihood-ratio statistic with a maximized class prior.

The statistic after ``n`` queried labels is

    w_n = prod_i P_hat(z_i) / Q_i(z_i | s_i)

where ``P_hat`` is the Bernoulli prior that maximizes the likelihood of the
observed label sequence and ``Q_i`` is a class-probability predictor built
only from labels seen before step ``i``.  Everything here is kept in the log
domain (nats); ``H0`` is rejected as soon as ``log w_n <= log alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

__all__ = [
    "EProcessState",
    "Verdict",
    "Decision",
    "log_prior_numerator",
    "push_observation",
    "decide",
    "log_statistic",
]


class Verdict(str, Enum):
    REJECT = "reject"
    RETAIN = "retain"
    CONTINUE = "continue"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    stopping_step: int

    @property
    def terminal(self) -> bool:
        return self.verdict is not Verdict.CONTINUE


@dataclass(frozen=True)
class EProcessState:
    """Running state of the test.

    ``n`` labels seen, ``k`` of them equal to one, ``log_denominator`` is the
    accumulated ``sum log Q_i(z_i|s_i)`` and ``log_w`` the current log statistic.
    """

    n: int = 0
    k: int = 0
    log_denominator: float = 0.0
    log_w: float = 0.0

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")
        if self.log_denominator > 0.0:
            raise ValueError("log_denominator must be <= 0")


def _xlogx_ratio(count: int, n: int) -> float:
    # 0 * log 0 = 0
    if count == 0:
        return 0.0
    return count * math.log(count / n)


def log_prior_numerator(k: int, n: int) -> float:
    """Log-likelihood of ``k`` ones in ``n`` labels under the MLE prior ``k/n``."""
    if n < 1:
        raise ValueError("statistic undefined before the first observation (n = 0)")
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return _xlogx_ratio(k, n) + _xlogx_ratio(n - k, n)


def push_observation(state: EProcessState, z: int, q_z: float) -> EProcessState:
    """Add one label ``z`` whose predicted probability (pre-update) was ``q_z``.

    The numerator is re-evaluated from ``(k, n)`` because the MLE prior moves
    with every observation; only the denominator accumulates.
    """
    if z not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {z!r}")
    if not 0.0 < q_z < 1.0:
        raise ValueError(
            f"predicted probability {q_z!r} outside (0, 1); was the classifier output clipped?"
        )
    n = state.n + 1
    k = state.k + int(z)
    log_den = state.log_denominator + math.log(q_z)
    return replace(state, n=n, k=k, log_denominator=log_den,
                   log_w=log_prior_numerator(k, n) - log_den)


def decide(state: EProcessState, alpha: float, labels_remaining: int) -> Decision:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if labels_remaining < 0:
        raise ValueError("labels_remaining must be non-negative")
    if state.n >= 1 and state.log_w <= math.log(alpha):
        return Decision(Verdict.REJECT, state.n)
    if labels_remaining == 0:
        return Decision(Verdict.RETAIN, state.n)
    return Decision(Verdict.CONTINUE, state.n)


def log_statistic(labels: Sequence[int], q_observed: Iterable[float]) -> float:
    """Evaluate ``log w_n`` over a whole sequence from scratch."""
    labels = list(labels)
    q_observed = list(q_observed)
    if len(labels) != len(q_observed):
        raise ValueError("labels and probabilities differ in length")
    n = len(labels)
    k = sum(labels)
    return log_prior_numerator(k, n) - math.fsum(math.log(q) for q in q_observed)
