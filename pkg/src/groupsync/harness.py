"""Seeded Monte Carlo trials and parameter sweeps.

Every trial owns a random stream derived from ``(master seed, size, p,
trial index)``, so a sweep's output depends only on its configuration and not
on how trials are scheduled across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import binomtest

from . import bounds
from .errors import ConfigError, DomainError, GroupSyncError
from .estimators import (
    ESTIMATOR_NAMES,
    MAP_BUDGET,
    detect_offset_vertex,
    edge_errors,
    estimate_edges,
    find_improving_shift,
    map_search_size,
    offset_configuration,
)
from .graphs import DiGraph, greedy_independent_set, max_degree, parse_graph_spec
from .groups import GroupTable, parse_group_spec
from .model import (
    SyncProblem,
    agreement_count,
    differences,
    likelihood_direction,
    log_likelihood,
    sample_observations,
    sample_vertex_labels,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "n", "p", "trials", "successes", "frequency",
    "wilson_lo", "wilson_hi", "mean_edge_errors", "analytic_bound",
)
GRAPH_KINDS = ("complete", "lattice", "path", "cycle", "star", "file")
_SEED_MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    graph: str
    group: str
    flip_probs: tuple[float, ...]
    sizes: tuple[int, ...]
    estimator: str
    trials: int
    seed: int = 0
    output: Optional[str] = None
    workers: int = 1
    detect_offset: bool = False

    def __post_init__(self):
        object.__setattr__(self, "flip_probs", tuple(float(p) for p in self.flip_probs))
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.flip_probs or any(not 0.0 <= p <= 1.0 for p in self.flip_probs):
            raise ConfigError("flip_probs must be a non-empty list of values in [0, 1]")
        if self.estimator not in ESTIMATOR_NAMES:
            raise ConfigError(f"estimator must be one of {ESTIMATOR_NAMES}, got {self.estimator!r}")
        kind = self.graph.partition(":")[0]
        if kind not in GRAPH_KINDS:
            raise ConfigError(f"graph kind must be one of {GRAPH_KINDS}, got {self.graph!r}")
        if kind != "file" and (not self.sizes or min(self.sizes) < 2):
            raise ConfigError("sizes must be a non-empty list of integers >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.seed <= _SEED_MASK:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        try:
            parse_group_spec(self.group)
        except GroupSyncError as exc:
            raise ConfigError(str(exc)) from exc

    def graph_spec(self, size: int) -> str:
        kind, _, arg = self.graph.partition(":")
        if kind == "file":
            return self.graph
        if kind == "lattice":
            return f"lattice:{size},{arg or 2}"
        return f"{kind}:{size}"


def config_from_dict(d: dict) -> ExperimentConfig:
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """One (size, p) point of a sweep."""

    graph_spec: str
    group_spec: str
    size: int
    flip_prob: float
    estimator: str
    master_seed: int = 0
    detect_offset: bool = False


@dataclass
class TrialResult:
    seed: int
    n: int
    p: float
    exact_recovery: bool
    edge_error_count: int
    n_edges: int
    estimator: str
    offset_vertex_found: Optional[int] = None
    offset_beats_truth: Optional[bool] = None
    map_surrogate: bool = False
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@lru_cache(maxsize=32)
def _graph(spec: str) -> DiGraph:
    return parse_graph_spec(spec)


@lru_cache(maxsize=32)
def _group(spec: str) -> GroupTable:
    return parse_group_spec(spec)


@lru_cache(maxsize=32)
def _independent_set(spec: str) -> tuple:
    return greedy_independent_set(_graph(spec))


def trial_seed(master_seed: int, size: int, p: float, index: int) -> int:
    """64-bit seed for one trial, derived from its coordinates in the sweep."""
    pbits = int(np.float64(p).view(np.uint64))
    ss = np.random.SeedSequence([int(master_seed) & _SEED_MASK, int(size), pbits, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent counter-based streams for vertex labels and observations."""
    children = np.random.SeedSequence(int(seed)).spawn(2)
    return tuple(np.random.Generator(np.random.Philox(c)) for c in children)


def sample_trial(problem: SyncProblem, seed: int):
    """Hidden labels ``x`` and observations ``y`` for a trial seed."""
    x_rng, y_rng = trial_streams(seed)
    x = sample_vertex_labels(problem, x_rng)
    y = sample_observations(problem, x, y_rng)
    return x, y


def offset_gain(problem: SyncProblem, x, y, u0: int, g: int) -> bool:
    """Whether the shifted labeling is strictly more likely than ``x``.

    Uses exact log-likelihoods when finite, agreement counts otherwise.
    """
    shifted = offset_configuration(problem.group, x, u0, g)
    psi_x = differences(problem.group, problem.graph, x)
    psi_s = differences(problem.group, problem.graph, shifted)
    if 0.0 < problem.flip_prob < 1.0:
        return log_likelihood(problem, y, psi_s) > log_likelihood(problem, y, psi_x)
    d = likelihood_direction(problem)
    return d * agreement_count(y, psi_s) > d * agreement_count(y, psi_x)


def run_problem_trial(problem: SyncProblem, estimator: str, seed: int, *, size: Optional[int] = None,
                      detect_offset: bool = False, candidates: Optional[Sequence[int]] = None,
                      map_budget: int = MAP_BUDGET) -> TrialResult:
    """Sample one trial and score the named estimator on it.

    When the exhaustive MAP search is over budget, the MAP outcome is
    replaced by an upper bound on success: the trial counts as a failure iff
    some single-vertex shift of the truth is strictly more likely.
    """
    start = time.perf_counter()
    x, y = sample_trial(problem, seed)
    truth = differences(problem.group, problem.graph, x)
    surrogate = estimator == "map" and map_search_size(problem) > map_budget
    if surrogate:
        hit = find_improving_shift(problem, x, y)
        est_x = x if hit is None else offset_configuration(problem.group, x, *hit)
        estimate = differences(problem.group, problem.graph, est_x)
    else:
        estimate = estimate_edges(estimator, problem, y)
    errors = edge_errors(estimate, truth)

    found, beats = None, None
    if detect_offset:
        g = int(problem.group.non_identity()[0])
        if candidates is None:
            candidates = greedy_independent_set(problem.graph)
        found = detect_offset_vertex(problem.group, problem.graph, x, y, g, candidates)
        if found is not None:
            beats = offset_gain(problem, x, y, found, g)

    return TrialResult(
        seed=int(seed),
        n=int(problem.graph.n_vertices if size is None else size),
        p=problem.flip_prob,
        exact_recovery=errors == 0,
        edge_error_count=errors,
        n_edges=problem.graph.n_edges,
        estimator=estimator,
        offset_vertex_found=found,
        offset_beats_truth=beats,
        map_surrogate=surrogate,
        wall_time=time.perf_counter() - start,
    )


def cell_problem(cell: Cell) -> SyncProblem:
    return SyncProblem(_graph(cell.graph_spec), _group(cell.group_spec), cell.flip_prob)


def run_trial(cell: Cell, index: int) -> TrialResult:
    problem = cell_problem(cell)
    seed = trial_seed(cell.master_seed, cell.size, cell.flip_prob, index)
    candidates = _independent_set(cell.graph_spec) if cell.detect_offset else None
    return run_problem_trial(problem, cell.estimator, seed, size=cell.size,
                             detect_offset=cell.detect_offset, candidates=candidates)


def _run_trial_safe(task):
    cell, index = task
    try:
        return run_trial(cell, index)
    except (GroupSyncError, ValueError) as exc:
        return f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval at the two-sided level matching ``z``."""
    level = math.erf(z / math.sqrt(2.0))
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class CellSummary:
    n: int
    p: float
    trials: int
    successes: Optional[int] = None
    frequency: Optional[float] = None
    wilson_lo: Optional[float] = None
    wilson_hi: Optional[float] = None
    mean_edge_errors: Optional[float] = None
    analytic_bound: Optional[float] = None
    offset_detections: Optional[int] = None
    offset_confirmed: Optional[int] = None
    map_surrogate: bool = False
    error: Optional[str] = None


@dataclass
class SweepResult:
    config: ExperimentConfig
    cells: list[CellSummary]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.cells:
            w.writerow([_fmt(getattr(c, col)) for col in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = asdict(self.config)
        cfg.pop("workers")  # scheduling only; output must not depend on it
        return json.dumps({"config": cfg, "cells": [asdict(c) for c in self.cells]},
                          indent=2, sort_keys=True) + "\n"

    def cell(self, n: int, p: float) -> CellSummary:
        for c in self.cells:
            if c.n == n and c.p == p:
                return c
        raise KeyError((n, p))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def analytic_bound(cfg: ExperimentConfig, problem: SyncProblem) -> Optional[float]:
    """Triangle: upper bound on failure probability.  MAP: upper bound on
    recovery probability.  ``None`` where no bound applies."""
    p, order = problem.flip_prob, problem.order
    try:
        if cfg.estimator == "triangle":
            return bounds.recovery_failure_bound(problem.graph.n_vertices, p, order)
        if cfg.estimator == "map":
            d = max_degree(problem.graph)
            size = len(greedy_independent_set(problem.graph))
            return 1.0 - bounds.offset_exists_lower_bound(p, d, order, size)
    except DomainError:
        return None
    return None


def _cells(cfg: ExperimentConfig) -> list[Cell]:
    sizes = cfg.sizes
    if cfg.graph.startswith("file:"):
        sizes = (parse_graph_spec(cfg.graph).n_vertices,)
    return [
        Cell(cfg.graph_spec(n), cfg.group, n, p, cfg.estimator, cfg.seed, cfg.detect_offset)
        for n in sizes for p in cfg.flip_probs
    ]


def _summarize(cfg: ExperimentConfig, cell: Cell, results: list) -> CellSummary:
    summary = CellSummary(n=cell.size, p=cell.flip_prob, trials=cfg.trials)
    failures = [r for r in results if isinstance(r, str)]
    if failures:
        summary.error = failures[0]
        log.warning("cell n=%s p=%s failed: %s", cell.size, cell.flip_prob, failures[0])
        return summary
    k = sum(r.exact_recovery for r in results)
    summary.successes = k
    summary.frequency = k / cfg.trials
    summary.wilson_lo, summary.wilson_hi = wilson_interval(k, cfg.trials)
    summary.mean_edge_errors = float(np.mean([r.edge_error_count for r in results]))
    summary.map_surrogate = any(r.map_surrogate for r in results)
    try:
        summary.analytic_bound = analytic_bound(cfg, cell_problem(cell))
    except GroupSyncError:
        summary.analytic_bound = None
    if cfg.detect_offset:
        summary.offset_detections = sum(r.offset_vertex_found is not None for r in results)
        summary.offset_confirmed = sum(bool(r.offset_beats_truth) for r in results)
    return summary


def run_sweep(cfg: ExperimentConfig, workers: Optional[int] = None, write: bool = True) -> SweepResult:
    """Run every cell of ``cfg``; write ``<output>`` (CSV) and its ``.json``
    sibling when an output path is configured."""
    workers = cfg.workers if workers is None else workers
    cells = _cells(cfg)
    tasks = [(c, i) for c in cells for i in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_run_trial_safe, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        flat = [_run_trial_safe(t) for t in tasks]

    summaries = []
    for j, cell in enumerate(cells):
        chunk = flat[j * cfg.trials:(j + 1) * cfg.trials]
        summaries.append(_summarize(cfg, cell, chunk))
    result = SweepResult(cfg, summaries)

    if write and cfg.output:
        out = Path(cfg.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(result.to_csv())
        out.with_suffix(".json").write_text(result.to_json())
    return result
