"""Property checks run by ``groupsync verify``.

Each check compares an implementation against an independent route (table
axioms by exhaustion, orbits by brute force, closed forms by sampling) and
returns a :class:`CheckResult`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds
from .estimators import map_estimator, same_orbit
from .graphs import (
    complete_digraph,
    from_edges,
    greedy_independent_set,
    is_connected,
    is_independent,
    lattice_digraph,
    small_connected_catalog,
)
from .groups import axiom_violations, direct_product, make_cyclic, make_symmetric, rows_are_permutations
from .model import SyncProblem, differences, log_likelihood, sample_two_hop


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def catalog_groups():
    groups = [make_cyclic(k) for k in range(1, 25)]
    groups += [make_symmetric(k) for k in (3, 4, 5)]
    groups.append(direct_product(make_cyclic(2), make_cyclic(3)))
    return groups


def check_group_axioms() -> CheckResult:
    bad = []
    for t in catalog_groups():
        v = axiom_violations(t)
        if v or not rows_are_permutations(t):
            bad.append(f"{t.name}: {v or 'row not a permutation'}")
    return CheckResult("group axioms", not bad, "; ".join(bad) or f"{len(catalog_groups())} groups")


def check_orbit_equivalence() -> CheckResult:
    """psi(x) == psi(x') iff x' = g x, over every pair on small connected graphs."""
    pairs = 0
    for graph in small_connected_catalog(4):
        for order in (2, 3):
            group = make_cyclic(order)
            configs = [np.array(c) for c in itertools.product(range(order), repeat=graph.n_vertices)]
            psis = [tuple(differences(group, graph, x)) for x in configs]
            for i, x in enumerate(configs):
                for j, xp in enumerate(configs):
                    pairs += 1
                    if (psis[i] == psis[j]) != same_orbit(group, x, xp):
                        return CheckResult("orbit equivalence", False, f"{graph.name} |G|={order} x={x} x'={xp}")
    return CheckResult("orbit equivalence", True, f"{pairs} pairs")


def check_normalization() -> CheckResult:
    worst = 0.0
    for order in range(2, 7):
        for p in np.linspace(0.0, 1.0, 1000):
            d = bounds.two_hop_distribution(p, order)
            worst = max(worst, abs(d.total - 1.0))
    return CheckResult("two-hop normalization", worst <= 1e-12, f"max deviation {worst:.3g}")


def check_extremality() -> CheckResult:
    for order in range(2, 7):
        pc = bounds.critical_flip_prob(order)
        f_c, h_c = bounds.two_hop_correct_prob(pc, order), bounds.two_hop_wrong_prob(pc, order)
        if not (math.isclose(f_c, 1 / order) and math.isclose(h_c, 1 / order)):
            return CheckResult("critical point", False, f"order {order}: f={f_c}, h={h_c}")
        for delta in (0.01, 0.05, 0.1):
            lo, hi = max(pc - delta, 0.0), min(pc + delta, 1.0)
            f_floor = min(bounds.two_hop_correct_prob(lo, order), bounds.two_hop_correct_prob(hi, order))
            h_ceil = max(bounds.two_hop_wrong_prob(lo, order), bounds.two_hop_wrong_prob(hi, order))
            for p in np.linspace(0.0, 1.0, 501):
                if pc - delta < p < pc + delta:
                    continue
                if bounds.two_hop_correct_prob(p, order) < f_floor - 1e-15:
                    return CheckResult("critical point", False, f"f dips at p={p}, order {order}")
                if bounds.two_hop_wrong_prob(p, order) > h_ceil + 1e-15:
                    return CheckResult("critical point", False, f"h peaks at p={p}, order {order}")
    return CheckResult("critical point", True, "orders 2..6")


def check_two_hop_monte_carlo(n_samples: int = 100_000, seed: int = 0) -> CheckResult:
    """Empirical two-hop frequencies within 3 binomial sigma of the closed forms."""
    rng = np.random.default_rng(seed)
    for order in (2, 3, 6):
        group = make_cyclic(order)
        for p in (0.1, 0.3, 0.45):
            truth, prod = sample_two_hop(group, p, n_samples, rng)
            offset = group.mul[group.inv[truth], prod]
            freq = np.bincount(offset, minlength=order) / n_samples
            f, h = bounds.two_hop_correct_prob(p, order), bounds.two_hop_wrong_prob(p, order)
            for z in range(order):
                target = f if z == group.identity else h
                sigma = math.sqrt(target * (1 - target) / n_samples)
                if abs(freq[z] - target) > 3 * sigma:
                    return CheckResult("two-hop Monte Carlo", False,
                                       f"order {order} p={p} element {z}: {freq[z]:.5f} vs {target:.5f}")
    return CheckResult("two-hop Monte Carlo", True, "orders {2,3,6} x p {0.1,0.3,0.45}")


def check_likelihood_normalization() -> CheckResult:
    for order in (2, 3):
        group = make_cyclic(order)
        graph = complete_digraph(2)
        graph3 = from_edges(3, [(0, 1), (1, 2), (0, 2)])
        for g in (graph, graph3):
            prob = SyncProblem(g, group, 0.3)
            psi = differences(group, g, np.arange(g.n_vertices) % order)
            total = sum(math.exp(log_likelihood(prob, np.array(y), psi))
                        for y in itertools.product(range(order), repeat=g.n_edges))
            if not math.isclose(total, 1.0, rel_tol=1e-12):
                return CheckResult("likelihood normalization", False, f"{g.name} |G|={order}: {total}")
    return CheckResult("likelihood normalization", True, "")


def brute_force_map_loglik(problem: SyncProblem, y) -> float:
    """Maximum log-likelihood over every vertex labeling, by plain enumeration."""
    group, graph = problem.group, problem.graph
    best = -math.inf
    edges = graph.edges.tolist()
    for x in itertools.product(range(group.order), repeat=graph.n_vertices):
        psi = [int(group.mul[group.inv[x[u]], x[v]]) for u, v in edges]
        best = max(best, log_likelihood(problem, y, psi))
    return best


def check_map_oracle(instances: int = 10, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    for k in range(instances):
        n = int(rng.integers(2, 6))
        group = make_cyclic(int(rng.integers(2, 4)))
        edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
        graph = from_edges(n, edges)
        prob = SyncProblem(graph, group, float(rng.uniform(0.05, 0.45)))
        y = rng.integers(0, group.order, graph.n_edges)
        rep = map_estimator(prob, y).representative
        got = log_likelihood(prob, y, differences(group, graph, rep))
        want = brute_force_map_loglik(prob, y)
        if not math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-12):
            return CheckResult("MAP vs enumeration", False, f"instance {k}: {got} vs {want}")
    return CheckResult("MAP vs enumeration", True, f"{instances} instances")


def check_graphs() -> CheckResult:
    for n in range(2, 51):
        if complete_digraph(n).n_edges != n * (n - 1):
            return CheckResult("graph invariants", False, f"complete:{n} edge count")
    for side, dim in [(2, 1), (3, 2), (4, 2), (3, 3), (5, 2)]:
        g = lattice_digraph(side, dim)
        if g.n_edges != dim * (side - 1) * side ** (dim - 1) or not is_connected(g):
            return CheckResult("graph invariants", False, f"lattice:{side},{dim}")
        if not is_independent(g, greedy_independent_set(g)):
            return CheckResult("graph invariants", False, f"lattice:{side},{dim} independent set")
    return CheckResult("graph invariants", True, "")


ALL_CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_group_axioms,
    check_graphs,
    check_orbit_equivalence,
    check_normalization,
    check_extremality,
    check_likelihood_normalization,
    check_two_hop_monte_carlo,
    check_map_oracle,
)


def run_all() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
