"""Active sequential two-sample testing with an anytime-valid likelihood-ratio statistic."""

from .classifiers import ClassifierConfig, LabeledExample, fit
from .data import (
    DiscreteFeatureScenario,
    GaussianScenario,
    MixtureScenario,
    load_csv_pool,
    write_csv_pool,
)
from .engine import RunConfig, RunRecord, run_batch, run_replication, run_test
from .query import Pool, StrategyConfig
from .stat import EProcessState, Verdict, decide, push_observation

__all__ = [
    "ClassifierConfig",
    "LabeledExample",
    "fit",
    "GaussianScenario",
    "MixtureScenario",
    "DiscreteFeatureScenario",
    "load_csv_pool",
    "write_csv_pool",
    "RunConfig",
    "RunRecord",
    "run_test",
    "run_batch",
    "run_replication",
    "Pool",
    "StrategyConfig",
    "EProcessState",
    "Verdict",
    "decide",
    "push_observation",
]

__version__ = "0.1.0"
