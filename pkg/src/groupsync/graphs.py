"""Simple directed graphs used as synchronization substrates."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import CapacityError, InvalidSizeError

MAX_LATTICE_VERTICES = 10**6


@dataclass(frozen=True, eq=False)
class DiGraph:
    """Directed graph without self-loops or duplicate edges.

    ``edges`` is an ``(m, 2)`` integer array of ``(tail, head)`` pairs; edge
    labelings are aligned with its row order.
    """

    n_vertices: int
    edges: np.ndarray
    name: str = ""

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 1:
            raise InvalidSizeError(f"graph needs at least one vertex, got {n}")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            if edges.min() < 0 or edges.max() >= n:
                raise InvalidSizeError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise InvalidSizeError("self-loops are not allowed")
            if len(np.unique(edges, axis=0)) != len(edges):
                raise InvalidSizeError("duplicate directed edges are not allowed")
        edges = edges.copy()
        edges.setflags(write=False)
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "edges", edges)

        incident = [[] for _ in range(n)]
        for k, (u, v) in enumerate(edges.tolist()):
            incident[u].append(k)
            incident[v].append(k)
        object.__setattr__(self, "_incident", tuple(tuple(x) for x in incident))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def tails(self) -> np.ndarray:
        return self.edges[:, 0]

    @property
    def heads(self) -> np.ndarray:
        return self.edges[:, 1]

    def incident_edges(self, v: int) -> tuple[int, ...]:
        """Indices of edges touching ``v`` in either orientation."""
        return self._incident[v]

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for k in self._incident[v]:
            u, w = self.edges[k]
            out.add(int(w) if u == v else int(u))
        return out

    def is_complete(self) -> bool:
        n = self.n_vertices
        return n >= 2 and self.n_edges == n * (n - 1)

    def __repr__(self):
        return f"DiGraph(name={self.name!r}, n_vertices={self.n_vertices}, n_edges={self.n_edges})"


VertexSet = tuple  # sorted tuple of distinct vertex indices


def from_edges(n_vertices: int, edges: Iterable[tuple[int, int]], name: str = "") -> DiGraph:
    return DiGraph(n_vertices, np.array(list(edges), dtype=np.int64).reshape(-1, 2), name)


def complete_digraph(n: int) -> DiGraph:
    """All ordered pairs (u, v) with u != v, in lexicographic order."""
    if n < 2:
        raise InvalidSizeError(f"complete digraph needs n >= 2, got {n}")
    u, v = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = u != v
    return DiGraph(n, np.stack([u[mask], v[mask]], axis=1), f"complete:{n}")


def lattice_digraph(side: int, dim: int) -> DiGraph:
    """Grid {0..side-1}^dim with unit-distance edges.

    Vertices are numbered lexicographically by coordinate; each edge points
    from the smaller to the larger coordinate along its axis.
    """
    if side < 2 or dim < 1:
        raise InvalidSizeError(f"lattice needs side >= 2 and dim >= 1, got side={side}, dim={dim}")
    if side**dim > MAX_LATTICE_VERTICES:
        raise CapacityError(f"lattice {side}^{dim} exceeds {MAX_LATTICE_VERTICES} vertices")
    n = side**dim
    coords = np.array(np.unravel_index(np.arange(n), (side,) * dim)).T
    blocks = []
    for axis in range(dim):
        stride = side ** (dim - 1 - axis)
        src = np.flatnonzero(coords[:, axis] < side - 1)
        blocks.append(np.stack([src, src + stride], axis=1))
    edges = np.concatenate(blocks)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return DiGraph(n, edges, f"lattice:{side},{dim}")


def path_digraph(n: int) -> DiGraph:
    if n < 2:
        raise InvalidSizeError("path needs n >= 2")
    return from_edges(n, [(i, i + 1) for i in range(n - 1)], f"path:{n}")


def cycle_digraph(n: int) -> DiGraph:
    if n < 3:
        raise InvalidSizeError("cycle needs n >= 3")
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)], f"cycle:{n}")


def star_digraph(n: int) -> DiGraph:
    if n < 2:
        raise InvalidSizeError("star needs n >= 2")
    return from_edges(n, [(0, i) for i in range(1, n)], f"star:{n}")


def max_degree(g: DiGraph) -> int:
    if g.n_edges == 0:
        return 0
    return int(g.degrees().max())


def greedy_independent_set(g: DiGraph) -> VertexSet:
    """Scan vertices in index order, keeping each one with no kept neighbour."""
    taken = np.zeros(g.n_vertices, dtype=bool)
    blocked = np.zeros(g.n_vertices, dtype=bool)
    for v in range(g.n_vertices):
        if blocked[v]:
            continue
        taken[v] = True
        for w in g.neighbors(v):
            blocked[w] = True
    return tuple(int(v) for v in np.flatnonzero(taken))


def is_independent(g: DiGraph, vertices: Iterable[int]) -> bool:
    member = np.zeros(g.n_vertices, dtype=bool)
    member[list(vertices)] = True
    return not np.any(member[g.tails] & member[g.heads])


def is_connected(g: DiGraph) -> bool:
    """Connectivity of the underlying undirected graph."""
    seen = np.zeros(g.n_vertices, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if not seen[w]:
                seen[w] = True
                queue.append(w)
    return bool(seen.all())


def dumps_edge_list(g: DiGraph) -> str:
    lines = [f"{g.n_vertices} {g.n_edges}"]
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    return "\n".join(lines) + "\n"


def loads_edge_list(text: str, name: str = "") -> DiGraph:
    """Parse ``n m`` followed by ``m`` lines of ``u v`` (0-based)."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise InvalidSizeError("edge list must start with 'n_vertices m_edges'")
    n, m = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != m:
        raise InvalidSizeError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for r in body:
        if len(r) != 2:
            raise InvalidSizeError(f"malformed edge line: {' '.join(r)!r}")
        edges.append((int(r[0]), int(r[1])))
    return from_edges(n, edges, name)


def save_edge_list(g: DiGraph, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_edge_list(g))


def load_edge_list(path: Union[str, Path]) -> DiGraph:
    return loads_edge_list(Path(path).read_text(), name=f"file:{path}")


def parse_graph_spec(spec: str) -> DiGraph:
    """Build a graph from ``complete:N``, ``lattice:SIDE,DIM``, ``path:N``,
    ``cycle:N``, ``star:N`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        return load_edge_list(arg)
    try:
        if kind == "complete":
            return complete_digraph(int(arg))
        if kind == "lattice":
            side, _, dim = arg.partition(",")
            return lattice_digraph(int(side), int(dim or 2))
        if kind == "path":
            return path_digraph(int(arg))
        if kind == "cycle":
            return cycle_digraph(int(arg))
        if kind == "star":
            return star_digraph(int(arg))
    except ValueError as exc:
        if isinstance(exc, (InvalidSizeError, CapacityError)):
            raise
        raise InvalidSizeError(f"bad graph spec {spec!r}: {exc}") from exc
    raise InvalidSizeError(f"unknown graph kind in spec {spec!r}")


def small_connected_catalog(max_vertices: int = 4) -> list[DiGraph]:
    """Path, star, cycle and complete digraphs on 2..max_vertices vertices."""
    out = []
    for n in range(2, max_vertices + 1):
        out.append(path_digraph(n))
        if n >= 3:
            out.append(star_digraph(n))
            out.append(cycle_digraph(n))
        out.append(complete_digraph(n))
    return out


def lattice_coordinates(side: int, dim: int) -> np.ndarray:
    """Coordinates of lattice vertices in index order."""
    return np.array(list(itertools.product(range(side), repeat=dim)), dtype=np.int64).reshape(-1, dim)
