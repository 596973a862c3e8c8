"""Command-line entry point.

    activeseq run --config configs/example.ini --out results/ [--threads N] [--seed S]
    activeseq tables --in results/
    activeseq theory --scenario configs/theory_example.txt
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import theory
from .experiment import ConfigError, emit_tables, load_config, read_summary, run_experiment

log = logging.getLogger("activeseq")


@dataclass
class TheorySpec:
    """Parsed theory scenario file."""

    posteriors: List[float] = field(default_factory=list)
    weights: List[float] = field(default_factory=list)
    model: List[Optional[float]] = field(default_factory=list)
    cell: List[Optional[int]] = field(default_factory=list)
    u: Optional[float] = None
    alpha: float = 0.05
    budget: int = 200


def parse_theory_spec(path) -> TheorySpec:
    """Rows ``posterior weight [model_posterior] [cell]`` plus ``u``/``alpha``/``budget`` lines.

    ``#`` starts a comment.  Model posteriors and cells must be given for
    every row or for none.
    """
    path = Path(path)
    spec = TheorySpec()
    for no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        try:
            if tokens[0] in ("u", "alpha", "budget"):
                if len(tokens) != 2:
                    raise ValueError(f"expected '{tokens[0]} <value>'")
                if tokens[0] == "budget":
                    spec.budget = int(tokens[1])
                else:
                    setattr(spec, tokens[0], float(tokens[1]))
                continue
            if not 2 <= len(tokens) <= 4:
                raise ValueError("expected 'posterior weight [model_posterior] [cell]'")
            spec.posteriors.append(float(tokens[0]))
            spec.weights.append(float(tokens[1]))
            spec.model.append(float(tokens[2]) if len(tokens) > 2 else None)
            spec.cell.append(int(tokens[3]) if len(tokens) > 3 else None)
        except ValueError as exc:
            raise ConfigError(f"{path}:{no}: {exc}") from None
    if len(spec.posteriors) < 2:
        raise ConfigError(f"{path}: need at least two support points")
    for name in ("model", "cell"):
        given = [v is not None for v in getattr(spec, name)]
        if any(given) and not all(given):
            raise ConfigError(f"{path}: column '{name}' must be given on every row or none")
    return spec


def theory_report(spec: TheorySpec) -> List[str]:
    scen = theory.DiscreteScenario(np.array(spec.posteriors), np.array(spec.weights))
    u = scen.prior0 if spec.u is None else spec.u
    out = [f"support_points = {len(spec.posteriors)}",
           f"prior0 = {scen.prior0:.12g}",
           f"mutual_information = {scen.mutual_information:.12g}",
           f"u = {u:.12g}"]
    lp = theory.mi_max_lp(scen.cells, u)
    cf = theory.bimodal_closed_form(scen.cells, u)
    out += [f"lp_optimum = {lp.mi:.12g}",
            f"lp_support = {[int(i) for i in lp.support]}",
            f"lp_weights = {[round(float(lp.scenario.weights[i]), 12) for i in lp.support]}",
            f"closed_form_mi = {cf.mi:.12g}",
            f"closed_form_matches_lp = {abs(cf.mi - lp.mi) <= 1e-9}"]
    if spec.model[0] is not None:
        Q = np.array(spec.model, dtype=float)
        kl = theory.kl_divergence(scen.cells, Q, scen.weights)
        k2 = theory.kl_squared("q_from_p", scen.cells, Q, scen.weights)
        var = k2 - kl ** 2
        out += [f"kl = {kl:.12g}", f"kl_squared_q_from_p = {k2:.12g}",
                f"kl_squared_p_from_q = "
                f"{theory.kl_squared('p_from_q', scen.cells, Q, scen.weights):.12g}",
                f"log_ratio_variance = {var:.12g}",
                f"relative_entropy_variance = "
                f"{theory.relative_entropy_variance(None, scen.cells, scen.weights):.12g}"]
        if spec.cell[0] is not None:
            labels = sorted(set(spec.cell))
            cells = [[i for i, c in enumerate(spec.cell) if c == lab] for lab in labels]
            inp = theory.partition_power_inputs(scen, Q, cells, spec.alpha, spec.budget)
            out += [f"alpha = {spec.alpha}", f"budget = {spec.budget}",
                    f"gain_delta = {inp.delta:.12g}", f"eps1 = {inp.eps1:.12g}",
                    f"eps2 = {inp.eps2:.12g}", f"sigma = {inp.sigma:.12g}"]
            for kind in ("proposed", "baseline"):
                try:
                    out.append(f"power_bound_{kind} = "
                               f"{theory.power_lower_bound(kind, inp):.12g}")
                except ValueError as exc:
                    out.append(f"power_bound_{kind} = undefined ({exc})")
            cond = inp.delta > math.sqrt(inp.eps1) + math.sqrt(inp.eps2)
            out.append(f"gain_exceeds_model_error = {cond}")
    return out


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    rows = run_experiment(cfg, args.out, workers=args.threads, seed=args.seed)
    failures = sum(r["failures"] for r in rows)
    log.info("wrote %d summary rows to %s (%d failed runs excluded)", len(rows),
             Path(args.out) / "summary.csv", failures)
    return 0


def _cmd_tables(args) -> int:
    src = Path(args.in_dir)
    summary = src / "summary.csv"
    if not summary.exists():
        raise ConfigError(f"{summary}: not found (run 'activeseq run' first)")
    tables = emit_tables(read_summary(summary))
    print(tables["errors"])
    print()
    print(tables["labels"])
    (src / "type1.csv").write_text(tables["type1_csv"], encoding="utf-8")
    print(f"\nType I series written to {src / 'type1.csv'}")
    return 0


def _cmd_theory(args) -> int:
    for line in theory_report(parse_theory_spec(args.scenario)):
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="activeseq",
                                description="Active sequential two-sample testing.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a replicated experiment grid")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--out", required=True, type=Path)
    r.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: all CPUs)")
    r.add_argument("--seed", type=int, default=None, help="override the config base seed")
    r.set_defaults(func=_cmd_run)
    t = sub.add_parser("tables", help="render tables from a results directory")
    t.add_argument("--in", dest="in_dir", required=True, type=Path)
    t.set_defaults(func=_cmd_tables)
    th = sub.add_parser("theory", help="exact information quantities for a discrete scenario")
    th.add_argument("--scenario", required=True, type=Path)
    th.set_defaults(func=_cmd_theory)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, theory.InfeasibleError, theory.InfiniteDivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
