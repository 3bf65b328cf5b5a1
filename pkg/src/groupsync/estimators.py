"""Estimators for the edge differences: trivial, triangle voting and exhaustive MAP."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import CapacityError, ShapeError, UnsupportedGraphError
from .graphs import DiGraph, is_connected
from .groups import GroupTable
from .model import (
    EdgeLabeling,
    SyncProblem,
    VertexLabeling,
    check_edge_labeling,
    differences,
    likelihood_direction,
)

MAP_BUDGET = 10**7
_MAP_CHUNK = 1 << 15

ESTIMATOR_NAMES = ("trivial", "triangle", "map")


@dataclass(frozen=True, eq=False)
class VoteTally:
    """Number of two-hop products landing on each group element."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def winner(self) -> int:
        # np.argmax returns the first maximum, i.e. the smallest index
        return int(np.argmax(self.counts))


@dataclass(frozen=True, eq=False)
class Orbit:
    """An orbit under global left translation, stored by its representative
    whose vertex 0 carries the identity."""

    representative: np.ndarray

    def edge_labels(self, group: GroupTable, graph: DiGraph) -> EdgeLabeling:
        return differences(group, graph, self.representative)


def trivial_estimator(y) -> EdgeLabeling:
    return np.array(y, dtype=np.int64, copy=True)


def _require_complete(problem: SyncProblem) -> None:
    g = problem.graph
    if not g.is_complete():
        raise UnsupportedGraphError(f"triangle estimator needs a complete digraph, got {g!r}")
    if g.n_vertices < 3:
        raise UnsupportedGraphError("triangle estimator needs at least 3 vertices")


def _observation_matrix(problem: SyncProblem, y) -> np.ndarray:
    """Dense n x n matrix with ``Y[u, v] = y(u, v)``; the diagonal is 0 and unused."""
    g = problem.graph
    mat = np.zeros((g.n_vertices, g.n_vertices), dtype=np.int64)
    mat[g.tails, g.heads] = y
    return mat


def triangle_votes(problem: SyncProblem, y, edge: tuple[int, int]) -> VoteTally:
    """Tally ``y(u, w) * y(w, v)`` over all third vertices ``w``."""
    _require_complete(problem)
    y = check_edge_labeling(problem, y)
    u, v = int(edge[0]), int(edge[1])
    n = problem.graph.n_vertices
    if u == v or not (0 <= u < n and 0 <= v < n):
        raise ShapeError(f"({u}, {v}) is not an edge of the graph")
    mat = _observation_matrix(problem, y)
    w = np.array([k for k in range(n) if k != u and k != v])
    products = problem.group.mul[mat[u, w], mat[w, v]]
    return VoteTally(np.bincount(products, minlength=problem.order))


def triangle_estimator(problem: SyncProblem, y) -> EdgeLabeling:
    """Per-edge plurality of two-hop products; ties go to the smallest element index."""
    _require_complete(problem)
    y = check_edge_labeling(problem, y)
    mul = problem.group.mul
    n, order = problem.graph.n_vertices, problem.order
    mat = _observation_matrix(problem, y)
    best = np.zeros((n, n), dtype=np.int64)
    w_idx, v_idx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for u in range(n):
        prods = mul[mat[u][:, None], mat]  # prods[w, v] = y(u,w) y(w,v)
        valid = (w_idx != u) & (w_idx != v_idx) & (v_idx != u)
        keys = v_idx[valid] * order + prods[valid]
        counts = np.bincount(keys, minlength=n * order).reshape(n, order)
        best[u] = np.argmax(counts, axis=1)
    return best[problem.graph.tails, problem.graph.heads]


def canonical_representative(group: GroupTable, x) -> VertexLabeling:
    """The member of ``[x]`` whose vertex 0 is the identity."""
    x = np.asarray(x, dtype=np.int64)
    return group.mul[group.inv[x[0]], x]


def same_orbit(group: GroupTable, x, x_prime) -> bool:
    """Whether ``x_prime = g x`` for a single group element ``g``."""
    x = np.asarray(x, dtype=np.int64)
    x_prime = np.asarray(x_prime, dtype=np.int64)
    if x.shape != x_prime.shape:
        raise ShapeError("labelings differ in length")
    if len(x) == 0:
        return True
    g = group.mul[x_prime[0], group.inv[x[0]]]
    return bool(np.array_equal(group.mul[g, x], x_prime))


def _gauge_fixed_block(order: int, n: int, identity: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop`` of the lexicographic enumeration of labelings with
    vertex 0 fixed to the identity (vertex 1 most significant)."""
    codes = np.arange(start, stop, dtype=np.int64)
    block = np.empty((len(codes), n), dtype=np.int64)
    block[:, 0] = identity
    for j in range(n - 1, 0, -1):
        block[:, j] = codes % order
        codes //= order
    return block


def map_search_size(problem: SyncProblem) -> int:
    return problem.order ** (problem.graph.n_vertices - 1)


def map_estimator(problem: SyncProblem, y, budget: int = MAP_BUDGET) -> Orbit:
    """Exhaustive maximum a posteriori orbit.

    The posterior is constant on orbits, so only labelings with vertex 0 at
    the identity are scored.  Under the uniform prior the posterior order is
    the order of agreement counts (reversed above the critical flip
    probability); the earliest labeling in enumeration order wins ties.
    """
    graph, group = problem.graph, problem.group
    size = map_search_size(problem)
    if size > budget:
        raise CapacityError(f"MAP search over {size} labelings exceeds budget {budget}")
    if not is_connected(graph):
        raise UnsupportedGraphError("MAP over orbits requires a connected graph")
    y = check_edge_labeling(problem, y)
    direction = likelihood_direction(problem)
    n = graph.n_vertices
    best_score, best_row = None, None
    for start in range(0, size, _MAP_CHUNK):
        block = _gauge_fixed_block(group.order, n, group.identity, start, min(size, start + _MAP_CHUNK))
        psi = group.mul[group.inv[block[:, graph.tails]], block[:, graph.heads]]
        scores = direction * np.count_nonzero(psi == y, axis=1)
        k = int(np.argmax(scores))
        if best_score is None or scores[k] > best_score:
            best_score, best_row = int(scores[k]), block[k]
    return Orbit(best_row.copy())


def map_edge_estimator(problem: SyncProblem, y) -> EdgeLabeling:
    return map_estimator(problem, y).edge_labels(problem.group, problem.graph)


def estimate_edges(name: str, problem: SyncProblem, y) -> EdgeLabeling:
    """Run the estimator called ``name`` and return its edge labeling."""
    if name == "trivial":
        return trivial_estimator(y)
    if name == "triangle":
        return triangle_estimator(problem, y)
    if name == "map":
        return map_edge_estimator(problem, y)
    raise ValueError(f"unknown estimator {name!r}; expected one of {ESTIMATOR_NAMES}")


def exact_recovery(estimate, truth) -> bool:
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ShapeError("estimate and truth differ in length")
    return bool(np.array_equal(estimate, truth))


def edge_errors(estimate, truth) -> int:
    return int(np.count_nonzero(np.asarray(estimate) != np.asarray(truth)))


# ---------------------------------------------------------------------------
# Offset vertices: single-vertex shifts that beat the truth
# ---------------------------------------------------------------------------

def offset_configuration(group: GroupTable, x, u0: int, g: int) -> VertexLabeling:
    """``x`` with the label at ``u0`` replaced by ``x(u0) * g``."""
    out = np.array(x, dtype=np.int64, copy=True)
    out[u0] = group.mul[out[u0], g]
    return out


def _shift_agreements(group: GroupTable, graph: DiGraph, x, y):
    """Per-edge agreement of ``y`` with the truth, with the tail shifted and
    with the head shifted, for every right-shift element."""
    psi = differences(group, graph, x)
    now = y == psi
    # tail u shifted to x(u) g:  (x(u) g)^-1 x(v) = g^-1 psi
    tail = y[:, None] == group.mul[group.inv[None, :], psi[:, None]]
    # head v shifted to x(v) g:  x(u)^-1 x(v) g = psi g
    head = y[:, None] == group.mul[psi[:, None], np.arange(group.order)[None, :]]
    return now, tail, head


def detect_offset_vertex(
    group: GroupTable,
    graph: DiGraph,
    x,
    y,
    g: int,
    candidates: Iterable[int],
) -> Optional[int]:
    """First candidate whose every incident observation reads as if its label
    were ``x(u) * g``.  Vertices without edges never qualify."""
    if int(g) == group.identity:
        raise ValueError("offset element must differ from the identity")
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    _, tail, head = _shift_agreements(group, graph, x, y)
    misses = np.bincount(graph.tails[~tail[:, g]], minlength=graph.n_vertices)
    misses += np.bincount(graph.heads[~head[:, g]], minlength=graph.n_vertices)
    deg = graph.degrees()
    for u in sorted(int(c) for c in candidates):
        if deg[u] > 0 and misses[u] == 0:
            return u
    return None


def find_improving_shift(problem: SyncProblem, x, y) -> Optional[tuple[int, int]]:
    """Smallest ``(u, g)`` such that moving ``x(u)`` to ``x(u) g`` strictly
    raises the likelihood of ``y``; ``None`` if the truth is a local optimum.

    Any hit certifies that the MAP orbit differs from the true orbit.
    """
    group, graph = problem.group, problem.graph
    direction = likelihood_direction(problem)
    if direction == 0:
        return None
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    now, tail, head = _shift_agreements(group, graph, x, y)
    base = now[:, None].astype(np.int64)
    delta = np.zeros((graph.n_vertices, group.order), dtype=np.int64)
    np.add.at(delta, graph.tails, tail.astype(np.int64) - base)
    np.add.at(delta, graph.heads, head.astype(np.int64) - base)
    delta[:, group.identity] = 0
    hits = np.argwhere(direction * delta > 0)
    if len(hits) == 0:
        return None
    u, g = hits[0]
    return int(u), int(g)
