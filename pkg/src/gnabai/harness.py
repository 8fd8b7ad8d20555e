"""Monte Carlo experiments over (algorithm, budget) grids.

Trial ``i`` of every cell draws from ``rng_stream(master_seed, i)``, so
all algorithms and budgets see common random numbers and the summary does
not depend on how trials are split across workers. Per-cell totals are
integers, which makes the merge exact.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .engine import ALGORITHM_KINDS, AlgorithmSpec, run
from .model import (
    INSTANCE_CHANNEL,
    MU_PATTERNS,
    RUN_CHANNEL,
    BanditInstance,
    InstanceSpec,
    make_bernoulli_instance,
    make_gaussian_instance,
    paper_instance_generator,
    rng_stream,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_HEADER = ("algorithm", "T", "trials", "errors", "p_hat", "se")
INSTANCE_TYPES = ("gaussian", "bernoulli", "paper_generator")
# spawn-key channel of the single instance shared by all trials
SHARED_INSTANCE_CHANNEL = 2


class ConfigError(ValueError):
    """A config document that does not match the schema."""


class ExperimentError(RuntimeError):
    """An engine failure, tagged with the cell and trial it happened in."""


@dataclass(frozen=True)
class InstanceConfig:
    type: str
    means: Optional[tuple] = None
    sds: Optional[tuple] = None
    K: Optional[int] = None
    mu_pattern: Optional[str] = None
    sigma_bar: Optional[float] = None
    distribution_kind: str = "gaussian"
    mu2: float = 0.90
    fresh_per_trial: bool = True

    @property
    def n_arms(self) -> int:
        return self.K if self.type == "paper_generator" else len(self.means)

    def build(self, master_seed: int, trial_index: int) -> BanditInstance:
        if self.type == "gaussian":
            return make_gaussian_instance(self.means, self.sds)
        if self.type == "bernoulli":
            return make_bernoulli_instance(self.means)
        spec = InstanceSpec(self.K, self.mu_pattern, self.sigma_bar, self.distribution_kind, self.mu2)
        if self.fresh_per_trial:
            rng = rng_stream(master_seed, trial_index, INSTANCE_CHANNEL)
        else:
            rng = rng_stream(master_seed, 0, SHARED_INSTANCE_CHANNEL)
        return paper_instance_generator(spec, rng)


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int
    trials: int
    algorithms: tuple
    instance: InstanceConfig
    budgets: tuple
    output: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if not self.algorithms:
            raise ConfigError("algorithms: at least one algorithm is required")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ConfigError("algorithms: duplicate names; set 'label' to distinguish specs of one kind")
        if not self.budgets or any(b >= c for b, c in zip(self.budgets, self.budgets[1:])):
            raise ConfigError("budgets: must be a non-empty strictly increasing list")
        K = self.instance.n_arms
        if self.budgets[0] < K:
            raise ConfigError(f"budgets: every T must be >= K={K}")


@dataclass
class CellResult:
    algorithm: str
    T: int
    trials: int = 0
    errors: int = 0
    count_totals: np.ndarray = field(default=None, repr=False)

    @property
    def p_hat(self) -> float:
        return self.errors / self.trials

    @property
    def se(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def allocation_fractions(self) -> np.ndarray:
        return self.count_totals / (self.trials * self.T)

    def merge(self, other: "CellResult") -> None:
        self.trials += other.trials
        self.errors += other.errors
        self.count_totals = other.count_totals.copy() if self.count_totals is None else self.count_totals + other.count_totals


@dataclass
class ExperimentSummary:
    cells: list

    def sorted_cells(self) -> list:
        return sorted(self.cells, key=lambda c: (c.algorithm, c.T))

    def cell(self, algorithm: str, T: int) -> CellResult:
        for c in self.cells:
            if c.algorithm == algorithm and c.T == T:
                return c
        raise KeyError((algorithm, T))

    def decay_points(self, algorithm: str) -> list:
        return [(c.T, c.p_hat) for c in self.sorted_cells() if c.algorithm == algorithm]


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    slope_se: float
    n_points: int

    @property
    def rate(self) -> float:
        return -self.slope


def _run_trials(config: ExperimentConfig, trial_indices: Sequence[int]) -> dict:
    cells = {}
    for i in trial_indices:
        instance = config.instance.build(config.master_seed, i)
        for spec in config.algorithms:
            for T in config.budgets:
                try:
                    out = run(spec, instance, T, rng_stream(config.master_seed, i, RUN_CHANNEL))
                except Exception as exc:
                    raise ExperimentError(f"cell ({spec.name}, T={T}), trial {i}: {exc}") from exc
                cell = cells.get((spec.name, T))
                if cell is None:
                    cell = cells[(spec.name, T)] = CellResult(spec.name, T, 0, 0, np.zeros(instance.K, dtype=np.int64))
                cell.trials += 1
                cell.errors += int(out.recommended != instance.best_arm)
                cell.count_totals += out.counts
    return cells


def _chunks(n: int, parts: int) -> list:
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentSummary:
    workers = workers or os.cpu_count() or 1
    chunks = _chunks(config.trials, min(workers, config.trials))
    if workers == 1:
        partials = [_run_trials(config, chunks[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_run_trials, [config] * len(chunks), chunks))
    merged = {}
    for part in partials:
        for key, cell in part.items():
            merged.setdefault(key, CellResult(cell.algorithm, cell.T)).merge(cell)
    log.info("ran %d trials x %d cells on %d worker(s)", config.trials, len(merged), workers)
    return ExperimentSummary(list(merged.values()))


def fit_decay(points: Sequence[tuple]) -> DecayFit:
    """Least-squares line through ``(T, log p_hat)``; cells with p_hat in {0, 1} are dropped."""
    usable = [(T, p) for T, p in points if 0.0 < p < 1.0]
    if len(usable) < 3:
        raise ValueError(f"need at least 3 points with 0 < p_hat < 1, got {len(usable)}")
    T, p = np.array(usable, dtype=float).T
    res = stats.linregress(T, np.log(p))
    return DecayFit(float(res.slope), float(res.intercept), float(res.rvalue**2), float(res.stderr), len(usable))


def write_results(summary: ExperimentSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in summary.sorted_cells():
            writer.writerow([c.algorithm, c.T, c.trials, c.errors, f"{c.p_hat:.6f}", f"{c.se:.6f}"])


def read_results(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            {
                "algorithm": row["algorithm"],
                "T": int(row["T"]),
                "trials": int(row["trials"]),
                "errors": int(row["errors"]),
                "p_hat": float(row["p_hat"]),
                "se": float(row["se"]),
            }
            for row in reader
        ]


def write_cell_json(summary: ExperimentSummary, path) -> None:
    """Per-cell allocation fractions plus a decay fit per algorithm where one exists."""
    cells = [
        {
            "algorithm": c.algorithm,
            "T": c.T,
            "trials": c.trials,
            "errors": c.errors,
            "allocation_fractions": [round(float(x), 12) for x in c.allocation_fractions],
        }
        for c in summary.sorted_cells()
    ]
    fits = {}
    for name in sorted({c.algorithm for c in summary.cells}):
        try:
            fits[name] = asdict(fit_decay(summary.decay_points(name)))
        except ValueError:
            fits[name] = None
    with open(path, "w") as fh:
        json.dump({"cells": cells, "decay_fits": fits}, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- config documents -------------------------------------------------------

_ALGO_KEYS = {"kind", "eta", "c_mu", "w_min", "explore", "estimator", "label"}
_INSTANCE_KEYS = {
    "gaussian": {"type", "means", "sds", "fresh_per_trial"},
    "bernoulli": {"type", "means", "fresh_per_trial"},
    "paper_generator": {"type", "K", "mu_pattern", "sigma_bar", "distribution_kind", "mu2", "fresh_per_trial"},
}
_TOP_KEYS = {"schema_version", "master_seed", "trials", "algorithms", "instance", "budgets", "output"}


def _require(doc: dict, key: str, where: str, kind):
    if key not in doc:
        raise ConfigError(f"{where}{key}: missing")
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{where}{key}: expected an integer, got {value!r}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(f"{where}{key}: expected a number, got {value!r}")
    if kind in (list, dict, str, bool) and not isinstance(value, kind):
        raise ConfigError(f"{where}{key}: expected {kind.__name__}, got {value!r}")
    return value


def _unknown(doc: dict, allowed: set, where: str) -> None:
    extra = sorted(set(doc) - allowed)
    if extra:
        raise ConfigError(f"{where}{extra[0]}: unknown field")


def _algorithm_from_dict(doc, where: str) -> AlgorithmSpec:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    _unknown(doc, _ALGO_KEYS, where + ".")
    kind = _require(doc, "kind", where + ".", str)
    if kind not in ALGORITHM_KINDS:
        raise ConfigError(f"{where}.kind: unknown kind {kind!r}")
    kwargs = {}
    for key in ("eta", "c_mu", "w_min", "explore"):
        if key in doc:
            kwargs[key] = float(_require(doc, key, where + ".", float))
    for key in ("estimator", "label"):
        if key in doc:
            kwargs[key] = _require(doc, key, where + ".", str)
    try:
        return AlgorithmSpec(kind, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _instance_from_dict(doc) -> InstanceConfig:
    where = "instance."
    if not isinstance(doc, dict):
        raise ConfigError("instance: expected an object")
    kind = _require(doc, "type", where, str)
    if kind not in INSTANCE_TYPES:
        raise ConfigError(f"instance.type: unknown type {kind!r}")
    _unknown(doc, _INSTANCE_KEYS[kind], where)
    fresh = doc.get("fresh_per_trial", True)
    if not isinstance(fresh, bool):
        raise ConfigError("instance.fresh_per_trial: expected bool")
    if kind == "paper_generator":
        K = _require(doc, "K", where, int)
        pattern = _require(doc, "mu_pattern", where, str)
        if pattern not in MU_PATTERNS:
            raise ConfigError(f"instance.mu_pattern: unsupported pattern {pattern!r}")
        sigma_bar = float(_require(doc, "sigma_bar", where, float))
        dist = doc.get("distribution_kind", "gaussian")
        if dist != "gaussian":
            raise ConfigError("instance.distribution_kind: only 'gaussian' is supported by the generator")
        mu2 = float(doc.get("mu2", 0.90))
        cfg = InstanceConfig(kind, K=K, mu_pattern=pattern, sigma_bar=sigma_bar, distribution_kind=dist,
                             mu2=mu2, fresh_per_trial=fresh)
        try:
            cfg.build(0, 0)
        except ValueError as exc:
            raise ConfigError(f"instance: {exc}") from exc
        return cfg
    means = _require(doc, "means", where, list)
    sds = _require(doc, "sds", where, list) if kind == "gaussian" else None
    cfg = InstanceConfig(kind, means=tuple(float(m) for m in means),
                         sds=tuple(float(s) for s in sds) if sds is not None else None, fresh_per_trial=fresh)
    try:
        cfg.build(0, 0)
    except ValueError as exc:
        raise ConfigError(f"instance: {exc}") from exc
    return cfg


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    _unknown(doc, _TOP_KEYS, "")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    seed = _require(doc, "master_seed", "", int)
    if not 0 <= seed < 2**64:
        raise ConfigError("master_seed: must be an unsigned 64-bit integer")
    trials = _require(doc, "trials", "", int)
    algos = _require(doc, "algorithms", "", list)
    algorithms = tuple(_algorithm_from_dict(a, f"algorithms[{i}]") for i, a in enumerate(algos))
    instance = _instance_from_dict(_require(doc, "instance", "", dict))
    budgets = _require(doc, "budgets", "", list)
    for i, b in enumerate(budgets):
        if isinstance(b, bool) or not isinstance(b, int):
            raise ConfigError(f"budgets[{i}]: expected an integer, got {b!r}")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a path string")
    return ExperimentConfig(seed, trials, algorithms, instance, tuple(budgets), output)


def config_to_dict(config: ExperimentConfig) -> dict:
    algos = []
    for a in config.algorithms:
        defaults = AlgorithmSpec(a.kind)
        entry = {"kind": a.kind}
        for key in ("eta", "c_mu", "w_min", "explore", "estimator", "label"):
            value = getattr(a, key)
            if value != getattr(defaults, key):
                entry[key] = value
        algos.append(entry)
    inst = config.instance
    if inst.type == "paper_generator":
        idoc = {"type": inst.type, "K": inst.K, "mu_pattern": inst.mu_pattern, "sigma_bar": inst.sigma_bar,
                "distribution_kind": inst.distribution_kind, "mu2": inst.mu2}
    else:
        idoc = {"type": inst.type, "means": list(inst.means)}
        if inst.type == "gaussian":
            idoc["sds"] = list(inst.sds)
    idoc["fresh_per_trial"] = inst.fresh_per_trial
    doc = {
        "schema_version": SCHEMA_VERSION,
        "master_seed": config.master_seed,
        "trials": config.trials,
        "algorithms": algos,
        "instance": idoc,
        "budgets": list(config.budgets),
    }
    if config.output is not None:
        doc["output"] = config.output
    return doc


def read_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from exc
    return config_from_dict(doc)


def write_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")
