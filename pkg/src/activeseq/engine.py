"""Run the active sequential test end to end and replicate it.

Budget convention: ``budget`` counts every oracle call, initialization
included, so the sequential loop runs for at most ``budget - n_init`` steps
and the statistic starts at the first post-initialization query.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .classifiers import ClassifierConfig, LabeledExample, fit
from .query import Pool, PoolExhaustedError, StrategyConfig, make_strategy
from .stat import EProcessState, Verdict, decide, push_observation

__all__ = [
    "RunConfig",
    "RunRecord",
    "RunAborted",
    "run_test",
    "run_batch",
    "run_replication",
    "replicate_seeds",
    "rejection_rate",
    "split_seed",
    "splitmix64",
]

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x`` (Steele, Lea & Flood 2014)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def split_seed(base_seed: int, index: int) -> int:
    """Per-replication seed: ``splitmix64(splitmix64(base) ^ index)``."""
    return splitmix64(splitmix64(base_seed & _MASK64) ^ (index & _MASK64))


class RunAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n_init: int = 10
    budget: int = 1000
    alpha: float = 0.05
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_init < self.budget:
            raise ValueError(f"need 1 <= n_init < budget, got {self.n_init}, {self.budget}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass
class RunRecord:
    verdict: str
    stopping_step: int
    labels_spent_total: int
    log_w: List[float]
    seed: int
    budget: int
    n_init: int
    alpha: float
    # per-step diagnostics; not serialized
    trace: Optional[dict] = field(default=None, repr=False, compare=False)

    @property
    def rejected(self) -> bool:
        return self.verdict == Verdict.REJECT.value

    def at_budget(self, budget: int) -> "RunRecord":
        """The record this run would have produced with a smaller budget.

        Valid because the random stream consumed per step never depends on
        the budget: a shorter run is an exact prefix of a longer one.
        """
        if budget > self.budget:
            raise ValueError("can only shorten a run")
        if budget <= self.n_init:
            raise ValueError("budget must exceed the initialization size")
        steps = budget - self.n_init
        if self.stopping_step <= steps:
            return replace(self, budget=budget, trace=None)
        return replace(self, verdict=Verdict.RETAIN.value, stopping_step=steps,
                       labels_spent_total=budget, log_w=self.log_w[:steps],
                       budget=budget, trace=None)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("trace")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        keys = {f for f in cls.__dataclass_fields__ if f != "trace"}
        return cls(**{k: d[k] for k in keys})


Oracle = Callable[[int], int]


def run_test(config: RunConfig, pool: Pool, oracle: Optional[Oracle] = None,
             keep_trace: bool = False, strategy=None, model=None) -> RunRecord:
    """One active sequential test on ``pool``.

    Per step: select an item, ask the oracle, score the label with the model
    as it stood *before* seeing it, update the statistic, decide, and only
    then (if continuing) train on the new pair.

    ``strategy`` and ``model`` override the ones built from ``config``; a
    supplied model must offer ``predict_proba``, ``update`` and
    ``training_size`` and is used as-is after initialization.
    """
    if len(pool) < config.budget:
        raise RunAborted(f"pool has {len(pool)} items but the budget is {config.budget}")
    pool = pool.fresh()
    oracle = oracle if oracle is not None else pool.oracle()
    rng = np.random.default_rng(config.seed)

    def ask(index: int) -> int:
        try:
            z = oracle(int(index))
        except Exception as exc:
            raise RunAborted(f"oracle failed on pool index {index}: {exc}") from exc
        if z not in (0, 1):
            raise RunAborted(f"oracle returned non-binary label {z!r} for index {index}")
        pool.mark(index)
        return z

    init_idx = rng.choice(len(pool), size=config.n_init, replace=False)
    init_labels = [ask(i) for i in init_idx]
    if model is None:
        model = fit([LabeledExample(pool.features[i], z)
                     for i, z in zip(init_idx, init_labels)], config.classifier)
    if strategy is None:
        strategy = make_strategy(config.strategy, pool, init_idx, init_labels)

    steps = config.budget - config.n_init
    state = EProcessState()
    log_w: List[float] = []
    trace = {"indices": [], "labels": [], "q": [], "training_size": []} if keep_trace else None
    decision = None
    for n in range(1, steps + 1):
        try:
            idx = strategy.select(pool, model, rng)
        except PoolExhaustedError as exc:
            raise RunAborted(f"step {n}: {exc}") from exc
        z = ask(idx)
        s = pool.features[idx]
        p1 = model.predict_proba(s)
        q_z = p1 if z == 1 else 1.0 - p1
        if trace is not None:
            trace["indices"].append(int(idx))
            trace["labels"].append(z)
            trace["q"].append(q_z)
            trace["training_size"].append(model.training_size)
        state = push_observation(state, z, q_z)
        log_w.append(state.log_w)
        decision = decide(state, config.alpha, steps - n)
        if decision.terminal:
            break
        model.update(LabeledExample(s, z))

    return RunRecord(verdict=decision.verdict.value, stopping_step=decision.stopping_step,
                     labels_spent_total=config.n_init + decision.stopping_step, log_w=log_w,
                     seed=config.seed, budget=config.budget, n_init=config.n_init,
                     alpha=config.alpha, trace=trace)


def replicate_seeds(seed: int):
    """(pool stream, run seed) derived from one replication seed."""
    pool_ss, run_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(pool_ss), int(run_ss.generate_state(1, np.uint64)[0])


def run_replication(config: RunConfig, scenario, seed: int) -> RunRecord:
    pool_rng, run_seed = replicate_seeds(seed)
    pool = scenario.generate(pool_rng)
    record = run_test(replace(config, seed=run_seed), pool)
    record.seed = seed
    return record


def _replicate_star(args):
    config, scenario, seed, skip = args
    try:
        return run_replication(config, scenario, seed)
    except RunAborted:
        if skip:
            return None
        raise


def run_batch(config: RunConfig, scenario, replications: int, base_seed: int,
              workers: int = 1, skip_failures: bool = False) -> List[Optional[RunRecord]]:
    """Independent replications; replication ``i`` uses ``split_seed(base_seed, i)``.

    Each replication draws a fresh pool from ``scenario``.  Output order is
    the replication order regardless of ``workers``.  With ``skip_failures``
    an aborted replication yields ``None`` instead of raising.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    jobs = [(config, scenario, split_seed(base_seed, i), skip_failures)
            for i in range(replications)]
    if workers <= 1:
        return [_replicate_star(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_replicate_star, jobs, chunksize=max(1, replications // (4 * workers))))


def rejection_rate(records) -> float:
    return sum(r.rejected for r in records) / len(records) if records else math.nan
