#!/usr/bin/env python3
"""Sweep logistic hyperparameters on the delta = 0.2 Gaussian scenario.

Prints Type II error and mean labels per budget for the proposed and the
baseline strategy, so a classifier setting can be compared against the
reference error curves.  Each setting is a Python dict literal, e.g.

    python scripts/calibrate_logistic.py "{'l2': 0.0}" "{'l2': 0.1}"
"""

import argparse
import ast

import numpy as np

from activeseq.classifiers import ClassifierConfig
from activeseq.data import GaussianScenario
from activeseq.engine import RunConfig, run_batch
from activeseq.query import StrategyConfig

BUDGETS = (200, 400, 600, 800, 1000)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("settings", nargs="*", default=["{}"])
    ap.add_argument("--replications", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    scen = GaussianScenario(delta=0.2)
    for text in args.settings:
        clf = ClassifierConfig(**ast.literal_eval(text))
        for strategy in ("bimodal", "random"):
            cfg = RunConfig(budget=max(BUDGETS), classifier=clf,
                            strategy=StrategyConfig(strategy))
            recs = run_batch(cfg, scen, args.replications, args.seed)
            cells = []
            for b in BUDGETS:
                short = [r.at_budget(b) for r in recs]
                t2 = 1 - np.mean([r.rejected for r in short])
                cells.append(f"{b}: {t2:.3f}/{np.mean([r.labels_spent_total for r in short]):.0f}")
            print(f"{text:<32} {strategy:<8} " + "  ".join(cells), flush=True)


if __name__ == "__main__":
    main()
