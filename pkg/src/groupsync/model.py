"""Synchronization problem instances and the noisy observation model.

Vertex labels are drawn i.i.d. uniform on the group.  Each edge reports the
group difference ``x(u)^-1 x(v)`` right-multiplied by noise that is the
identity with probability ``1 - p`` and uniform on the non-identity elements
otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError, InvalidOrderError, ShapeError
from .graphs import DiGraph
from .groups import GroupTable

# Labelings are plain integer arrays of element indices.
VertexLabeling = np.ndarray
EdgeLabeling = np.ndarray


@dataclass(frozen=True)
class SyncProblem:
    graph: DiGraph
    group: GroupTable
    flip_prob: float

    def __post_init__(self):
        p = float(self.flip_prob)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"flip probability must lie in [0, 1], got {p}")
        if self.group.order < 2:
            raise InvalidOrderError("synchronization needs a group with at least 2 elements")
        object.__setattr__(self, "flip_prob", p)

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def wrong_prob(self) -> float:
        """Probability of each particular wrong observation value."""
        return self.flip_prob / (self.order - 1)


def _as_labels(a, length: int, order: int, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if a.shape != (length,):
        raise ShapeError(f"{what} must have length {length}, got shape {a.shape}")
    if length and (a.min() < 0 or a.max() >= order):
        raise IndexError(f"{what} contains an element index outside [0, {order})")
    return a


def check_vertex_labeling(problem: SyncProblem, x) -> VertexLabeling:
    return _as_labels(x, problem.graph.n_vertices, problem.order, "vertex labeling")


def check_edge_labeling(problem: SyncProblem, y) -> EdgeLabeling:
    return _as_labels(y, problem.graph.n_edges, problem.order, "edge labeling")


def differences(group: GroupTable, graph: DiGraph, x) -> EdgeLabeling:
    """``x(u)^-1 x(v)`` for every edge ``(u, v)`` in edge-list order."""
    x = np.asarray(x, dtype=np.int64)
    return group.mul[group.inv[x[graph.tails]], x[graph.heads]]


def edge_differences(problem: SyncProblem, x) -> EdgeLabeling:
    x = check_vertex_labeling(problem, x)
    return differences(problem.group, problem.graph, x)


def translate(group: GroupTable, g: int, x) -> VertexLabeling:
    """Global left translation ``u -> g * x(u)``."""
    return group.mul[int(g), np.asarray(x, dtype=np.int64)]


def uniform_elements(order: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, order, size=size, dtype=np.int64)


def sample_vertex_labels(problem: SyncProblem, rng: np.random.Generator) -> VertexLabeling:
    return uniform_elements(problem.order, problem.graph.n_vertices, rng)


def sample_noise(group: GroupTable, p: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Noise elements: identity w.p. ``1 - p``, else uniform on the rest.

    One uniform draw per edge decides both whether and how the edge is
    corrupted, so edge ``k`` depends only on the ``k``-th draw of ``rng``.
    """
    u = rng.random(size)
    flipped = u < p
    noise = np.full(size, group.identity, dtype=np.int64)
    if p > 0 and group.order > 1:
        others = group.non_identity()
        # u/p is uniform on [0, 1) given a flip
        slot = np.minimum((u[flipped] / p * len(others)).astype(np.int64), len(others) - 1)
        noise[flipped] = others[slot]
    return noise


def sample_observations(problem: SyncProblem, x, rng: np.random.Generator) -> EdgeLabeling:
    psi = edge_differences(problem, x)
    noise = sample_noise(problem.group, problem.flip_prob, len(psi), rng)
    return problem.group.mul[psi, noise]


def agreement_count(y, psi_x) -> int:
    return int(np.count_nonzero(np.asarray(y) == np.asarray(psi_x)))


def log_likelihood(problem: SyncProblem, y, psi_x) -> float:
    """Log probability of observing ``y`` when the true differences are ``psi_x``."""
    p = problem.flip_prob
    if not 0.0 < p < 1.0:
        raise DomainError(f"log-likelihood is infinite at p={p}; compare agreement counts instead")
    y = check_edge_labeling(problem, y)
    psi_x = check_edge_labeling(problem, psi_x)
    agree = agreement_count(y, psi_x)
    disagree = len(y) - agree
    return agree * math.log1p(-p) + disagree * math.log(problem.wrong_prob)


def likelihood_direction(problem: SyncProblem) -> int:
    """+1 if more agreements mean higher likelihood, -1 if fewer, 0 if indifferent.

    Valid for every ``p`` in [0, 1], including the endpoints where the
    log-likelihood itself is infinite.
    """
    right, wrong = 1.0 - problem.flip_prob, problem.wrong_prob
    if right > wrong:
        return 1
    if right < wrong:
        return -1
    return 0


def trial_record(seed: int, problem: SyncProblem, x, y) -> dict[str, Any]:
    return {
        "seed": int(seed),
        "graph": problem.graph.name,
        "group": problem.group.name,
        "flip_prob": problem.flip_prob,
        "x": [int(v) for v in x],
        "y": [int(v) for v in y],
    }


def dumps_trial_record(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True)


def loads_trial_record(text: str) -> dict[str, Any]:
    rec = json.loads(text)
    missing = {"seed", "graph", "group", "flip_prob", "x", "y"} - rec.keys()
    if missing:
        raise ValueError(f"trial record missing fields: {sorted(missing)}")
    rec["x"] = np.asarray(rec["x"], dtype=np.int64)
    rec["y"] = np.asarray(rec["y"], dtype=np.int64)
    return rec


def sample_two_hop(group: GroupTable, p: float, n_samples: int, rng: np.random.Generator):
    """Draw independent two-hop paths ``a -> b -> c`` from the model.

    Returns ``(truth, product)`` where ``truth = x(a)^-1 x(c)`` and
    ``product = y(a, b) y(b, c)``.
    """
    a = 3 * np.arange(n_samples)
    edges = np.concatenate([np.stack([a, a + 1], 1), np.stack([a + 1, a + 2], 1)])
    problem = SyncProblem(DiGraph(3 * n_samples, edges, "two-hop"), group, p)
    x = sample_vertex_labels(problem, rng)
    y = sample_observations(problem, x, rng)
    product = group.mul[y[:n_samples], y[n_samples:]]
    truth = group.mul[group.inv[x[a]], x[a + 2]]
    return truth, product
