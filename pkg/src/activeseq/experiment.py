"""Replicated experiment grids: config parsing, execution, aggregation, tables.

A config is an INI file (see ``configs/example.ini``).  Each grid cell is a
(scenario parameter, class prior, classifier, strategy) combination; it is
run once at the largest budget and every smaller budget is read off the same
runs, since a shorter run is an exact prefix of a longer one.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import os
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from .classifiers import ClassifierConfig
from .data import GaussianScenario, MixtureScenario, gaussian_cell_priors
from .engine import RunConfig, run_batch
from .query import StrategyConfig
from .theory import welch_t_test

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "summarize",
    "emit_tables",
    "read_summary",
    "SUMMARY_FIELDS",
]

STRATEGY_LABELS = {"random": "Baseline", "bimodal": "Proposed", "partition": "Partition"}

SUMMARY_FIELDS = [
    "scenario", "param_name", "param", "prior0", "classifier", "strategy", "budget",
    "hypothesis", "replications", "failures", "rejection_rate", "error_rate",
    "mean_labels", "sd_labels", "mean_labels_rejecting", "sd_labels_rejecting", "ttest_p",
]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "gaussian"
    replications: int = 200
    base_seed: int = 0
    budgets: List[int] = field(default_factory=lambda: [200, 400, 600, 800, 1000])
    priors: List[float] = field(default_factory=lambda: [0.5])
    params: List[float] = field(default_factory=lambda: [0.2])
    strategies: List[str] = field(default_factory=lambda: ["bimodal", "random"])
    classifiers: Dict[str, ClassifierConfig] = field(
        default_factory=lambda: {"logistic": ClassifierConfig()})
    n_init: int = 10
    alpha: float = 0.05
    pool_size: int = 2000
    dim: int = 2
    mixture_means: Optional[tuple] = None
    mixture_scale: float = 1.0
    partition_axis: int = 0
    partition_boundaries: tuple = ()
    partition_priors: str = "known"

    @property
    def param_name(self) -> str:
        return "delta" if self.scenario == "gaussian" else "mixture_ratio"

    def make_scenario(self, param: float, prior0: float):
        if self.scenario == "gaussian":
            return GaussianScenario(delta=param, prior0=prior0, dim=self.dim,
                                    pool_size=self.pool_size)
        kw = {} if self.mixture_means is None else {"means": self.mixture_means}
        return MixtureScenario(mixture_ratio=param, prior0=prior0, pool_size=self.pool_size,
                               scale=self.mixture_scale, **kw)

    def strategy_config(self, name: str, scenario) -> StrategyConfig:
        if name != "partition":
            return StrategyConfig(name)
        priors = None
        if self.partition_priors == "known":
            if not isinstance(scenario, GaussianScenario) or self.partition_axis != 0:
                raise ConfigError("known partition priors need a gaussian scenario cut on axis 0")
            priors = tuple(gaussian_cell_priors(scenario, self.partition_boundaries))
        return StrategyConfig("partition", axis=self.partition_axis,
                              boundaries=tuple(self.partition_boundaries), cell_priors=priors)


class _Reader:
    """configparser wrapper that reports the file line of a bad value."""

    def __init__(self, path: Path):
        self.path = path
        self.lines = path.read_text(encoding="utf-8").splitlines()
        self.cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            self.cp.read_string("\n".join(self.lines), source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def _line(self, section: str, key: str) -> int:
        current = None
        for no, raw in enumerate(self.lines, start=1):
            line = raw.strip()
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
            elif current == section and line.split("=", 1)[0].strip().lower() == key:
                return no
        return 0

    def fail(self, section: str, key: str, msg: str):
        raise ConfigError(f"{self.path}:{self._line(section, key)}: [{section}] {key}: {msg}")

    def get(self, section, key, conv, default):
        if not self.cp.has_option(section, key):
            return default
        raw = self.cp.get(section, key).strip()
        if raw == "":
            return default
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            self.fail(section, key, f"cannot parse {raw!r} ({exc})")

    def get_list(self, section, key, conv, default):
        return self.get(section, key, lambda s: [conv(v.strip()) for v in s.split(",")
                                                 if v.strip()], default)


def _bool(s: str) -> bool:
    v = s.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _classifier(r: _Reader, kind: str) -> ClassifierConfig:
    base = ClassifierConfig(kind=kind)
    sec = kind
    kw = dict(
        kind=kind,
        epochs=r.get(sec, "epochs", int, base.epochs),
        init_epochs=r.get(sec, "init_epochs", int, base.init_epochs),
        step_size=r.get(sec, "step_size", float, base.step_size),
        l2=r.get(sec, "l2", float, base.l2),
        n_neighbors=r.get(sec, "n_neighbors", int, base.n_neighbors),
        clip_epsilon=r.get(sec, "clip_epsilon", float, base.clip_epsilon),
        standardize=r.get(sec, "standardize", _bool, base.standardize),
    )
    try:
        return ClassifierConfig(**kw)
    except ValueError as exc:
        r.fail(sec, "kind", str(exc))


def _means(s: str) -> tuple:
    return tuple(tuple(float(v) for v in m.split()) for m in s.split(";") if m.strip())


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such config file")
    r = _Reader(path)
    E = "experiment"
    if not r.cp.has_section(E):
        raise ConfigError(f"{path}: missing [experiment] section")
    cfg = ExperimentConfig()
    cfg.scenario = r.get(E, "scenario", str, cfg.scenario)
    if cfg.scenario not in ("gaussian", "mixture"):
        r.fail(E, "scenario", f"unknown scenario {cfg.scenario!r}")
    cfg.replications = r.get(E, "replications", int, cfg.replications)
    if cfg.replications < 1:
        r.fail(E, "replications", "must be >= 1")
    cfg.base_seed = r.get(E, "base_seed", int, cfg.base_seed)
    cfg.budgets = r.get_list(E, "budgets", int, cfg.budgets)
    cfg.priors = r.get_list(E, "priors", float, cfg.priors)
    key = "deltas" if cfg.scenario == "gaussian" else "mixture_ratios"
    default = cfg.params if cfg.scenario == "gaussian" else [0.7]
    cfg.params = r.get_list(E, key, float, default)
    cfg.strategies = r.get_list(E, "strategies", str, cfg.strategies)
    for s in cfg.strategies:
        if s not in STRATEGY_LABELS:
            r.fail(E, "strategies", f"unknown strategy {s!r}")
    kinds = r.get_list(E, "classifiers", str, ["logistic"])
    for k in kinds:
        if k not in ("logistic", "knn"):
            r.fail(E, "classifiers", f"unknown classifier {k!r}")
    cfg.classifiers = {k: _classifier(r, k) for k in kinds}
    cfg.n_init = r.get(E, "n_init", int, cfg.n_init)
    cfg.alpha = r.get(E, "alpha", float, cfg.alpha)
    if not 0 < cfg.alpha < 1:
        r.fail(E, "alpha", "must lie in (0, 1)")
    cfg.pool_size = r.get(E, "pool_size", int, cfg.pool_size)
    cfg.dim = r.get(E, "dim", int, cfg.dim)
    if not cfg.budgets or min(cfg.budgets) <= cfg.n_init:
        r.fail(E, "budgets", f"every budget must exceed n_init={cfg.n_init}")
    if max(cfg.budgets) > cfg.pool_size:
        r.fail(E, "budgets", f"largest budget exceeds pool_size={cfg.pool_size}")
    cfg.mixture_means = r.get("mixture", "means", _means, None)
    cfg.mixture_scale = r.get("mixture", "scale", float, cfg.mixture_scale)
    cfg.partition_axis = r.get("partition", "axis", int, 0)
    cfg.partition_boundaries = tuple(r.get_list("partition", "boundaries", float, []))
    cfg.partition_priors = r.get("partition", "cell_priors", str, "known")
    if cfg.partition_priors not in ("known", "estimated"):
        r.fail("partition", "cell_priors", "expected 'known' or 'estimated'")
    if "partition" in cfg.strategies and not cfg.partition_boundaries:
        r.fail("partition", "boundaries", "partition strategy needs at least one boundary")
    return cfg


def _grid(cfg: ExperimentConfig):
    for param in cfg.params:
        for prior in cfg.priors:
            for clf in cfg.classifiers:
                for strat in cfg.strategies:
                    yield param, prior, clf, strat


def run_experiment(cfg: ExperimentConfig, out_dir, workers: Optional[int] = None,
                   seed: Optional[int] = None) -> List[dict]:
    """Run every grid cell, write ``runs.jsonl`` and ``summary.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = workers or os.cpu_count() or 1
    base_seed = cfg.base_seed if seed is None else seed
    top = max(cfg.budgets)
    raw_lines = []
    for param, prior, clf, strat in _grid(cfg):
        scenario = cfg.make_scenario(param, prior)
        run_cfg = RunConfig(n_init=cfg.n_init, budget=top, alpha=cfg.alpha,
                            classifier=cfg.classifiers[clf],
                            strategy=cfg.strategy_config(strat, scenario))
        records = run_batch(run_cfg, scenario, cfg.replications, base_seed, workers=workers,
                            skip_failures=True)
        failures = sum(r is None for r in records)
        if failures:
            log.warning("%s=%s prior=%s %s/%s: %d failed runs excluded",
                        cfg.param_name, param, prior, clf, strat, failures)
        keys = {"scenario": cfg.scenario, "param_name": cfg.param_name, "param": param,
                "prior0": prior, "classifier": clf, "strategy": strat}
        done = [r for r in records if r is not None]
        for budget in cfg.budgets:
            for i, r in enumerate(records):
                line = dict(keys, budget=budget, replication=i)
                if r is None:
                    line["failed"] = True
                else:
                    line.update(_raw_fields(r.at_budget(budget)))
                raw_lines.append(json.dumps(line))
        log.info("%s=%s prior=%s %s/%s: %d/%d rejected at budget %d", cfg.param_name, param,
                 prior, clf, strat, sum(r.rejected for r in done), len(done), top)
    (out / "runs.jsonl").write_text("\n".join(raw_lines) + "\n", encoding="utf-8")
    rows = summarize(json.loads(s) for s in raw_lines)
    write_summary(rows, out / "summary.csv")
    return rows


def _raw_fields(record) -> dict:
    """Record fields for the raw file; the statistic path is reduced to its last value."""
    d = record.to_dict()
    path = d.pop("log_w")
    d["final_log_w"] = path[-1] if path else 0.0
    return d


def _is_null(line: dict) -> bool:
    if line["param_name"] == "delta":
        return float(line["param"]) == 0.0
    return float(line["param"]) == 1.0


def _sd(xs: Sequence[float]) -> float:
    return statistics.stdev(xs) if len(xs) > 1 else math.nan


def summarize(lines: Iterable[dict]) -> List[dict]:
    """Fold raw run lines into one row per (cell, budget); grid order preserved."""
    groups: Dict[tuple, List[dict]] = {}
    for line in lines:
        key = (line["scenario"], line["param_name"], line["param"], line["prior0"],
               line["classifier"], line["strategy"], line["budget"])
        groups.setdefault(key, []).append(line)
    rows = []
    spent: Dict[tuple, List[int]] = {}
    for key, group in groups.items():
        ok = [g for g in group if not g.get("failed")]
        labels = [g["labels_spent_total"] for g in ok]
        rej_labels = [g["labels_spent_total"] for g in ok if g["verdict"] == "reject"]
        rate = len(rej_labels) / len(ok) if ok else math.nan
        null = _is_null(group[0])
        rows.append({
            "scenario": key[0], "param_name": key[1], "param": key[2], "prior0": key[3],
            "classifier": key[4], "strategy": key[5], "budget": key[6],
            "hypothesis": "H0" if null else "H1",
            "replications": len(ok), "failures": len(group) - len(ok),
            "rejection_rate": rate,
            "error_rate": rate if null else 1.0 - rate,
            "mean_labels": statistics.fmean(labels) if labels else math.nan,
            "sd_labels": _sd(labels),
            "mean_labels_rejecting": statistics.fmean(rej_labels) if rej_labels else math.nan,
            "sd_labels_rejecting": _sd(rej_labels),
            "ttest_p": math.nan,
        })
        spent[key] = labels
    for row in rows:
        if row["strategy"] == "random":
            continue
        base = (row["scenario"], row["param_name"], row["param"], row["prior0"],
                row["classifier"], "random", row["budget"])
        mine = base[:5] + (row["strategy"], row["budget"])
        if base in spent:
            try:
                row["ttest_p"] = welch_t_test(spent[mine], spent[base])[1]
            except ValueError:
                pass
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_summary(rows: List[dict], path) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row[k]) for k in SUMMARY_FIELDS})
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


_INT_FIELDS = {"budget", "replications", "failures"}
_STR_FIELDS = {"scenario", "param_name", "classifier", "strategy", "hypothesis"}


def read_summary(path) -> List[dict]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                if k in _STR_FIELDS:
                    row[k] = v
                elif k in _INT_FIELDS:
                    row[k] = int(v)
                else:
                    row[k] = float(v) if v != "" else math.nan
            rows.append(row)
    return rows


def _ordered(values) -> list:
    return list(dict.fromkeys(values))


def _render(title: str, row_keys, col_keys, cells: dict, row_header: Sequence[str]) -> str:
    """Plain-text table; missing cells print as an em dash."""
    head = list(row_header) + [f"{c[0]}/{c[1]}" for c in col_keys]
    body = [[*map(str, rk), *[cells.get((rk, ck), "—") for ck in col_keys]]
            for rk in row_keys]
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    line = lambda r: "  ".join(s.rjust(w) for s, w in zip(r, widths)).rstrip()
    return "\n".join([title, line(head), "-" * len(line(head))] + [line(r) for r in body])


def emit_tables(rows: List[dict]) -> Dict[str, str]:
    """Render error-rate and label-count tables plus a Type I CSV series.

    Returns ``{"errors": ..., "labels": ..., "type1_csv": ...}``.  Rows are
    (scenario parameter, prior, test); columns are (classifier, budget), in
    the order the cells first appear in ``rows``.
    """
    row_keys = _ordered((r["param"], r["prior0"], STRATEGY_LABELS.get(r["strategy"],
                        r["strategy"])) for r in rows)
    col_keys = _ordered((r["classifier"], r["budget"]) for r in rows)
    errs, labels = {}, {}
    for r in rows:
        rk = (r["param"], r["prior0"], STRATEGY_LABELS.get(r["strategy"], r["strategy"]))
        ck = (r["classifier"], r["budget"])
        if not r["replications"]:
            continue  # every run failed: rendered as missing
        kind = "I" if r["hypothesis"] == "H0" else "II"
        errs[(rk, ck)] = f"{r['error_rate']:.2f}({kind})"
        sd = r["sd_labels"]
        labels[(rk, ck)] = f"{r['mean_labels']:.1f}±{0.0 if math.isnan(sd) else sd:.0f}"
    pname = rows[0]["param_name"] if rows else "param"
    header = (pname, "P(Z=0)", "test")
    t1 = _render("Error rates (Type I under H0, Type II under H1)", row_keys, col_keys,
                 errs, header)
    t2 = _render("Mean labels spent (± sd), retained runs count the full budget",
                 row_keys, col_keys, labels, header)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "param", "prior0", "classifier", "strategy", "budget",
                "type_i_error"])
    for r in rows:
        if r["hypothesis"] == "H0":
            w.writerow([r["scenario"], _fmt(r["param"]), _fmt(r["prior0"]), r["classifier"],
                        r["strategy"], r["budget"], _fmt(r["error_rate"])])
    return {"errors": t1, "labels": t2, "type1_csv": buf.getvalue()}
