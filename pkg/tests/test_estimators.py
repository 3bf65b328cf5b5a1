import itertools
import math

import numpy as np
import pytest
from scipy.stats import binom
from hypothesis import given, settings, strategies as st

from groupsync.errors import CapacityError, ShapeError, UnsupportedGraphError
from groupsync.estimators import (
    Orbit,
    canonical_representative,
    detect_offset_vertex,
    edge_errors,
    estimate_edges,
    exact_recovery,
    find_improving_shift,
    map_edge_estimator,
    map_estimator,
    offset_configuration,
    same_orbit,
    triangle_estimator,
    triangle_votes,
    trivial_estimator,
)
from groupsync.graphs import (
    complete_digraph,
    cycle_digraph,
    from_edges,
    greedy_independent_set,
    lattice_digraph,
    path_digraph,
)
from groupsync.groups import direct_product, make_cyclic, make_symmetric
from groupsync.harness import sample_trial
from groupsync.model import (
    SyncProblem,
    agreement_count,
    differences,
    edge_differences,
    log_likelihood,
    sample_observations,
    sample_vertex_labels,
    translate,
)

Z2, Z3 = make_cyclic(2), make_cyclic(3)
S3 = make_symmetric(3)


def edge_index(graph, u, v):
    return graph.edges.tolist().index([u, v])


# --- trivial ---------------------------------------------------------------

def test_trivial_is_identity():
    y = np.array([2, 0, 1])
    assert np.array_equal(trivial_estimator(y), y)
    prob = SyncProblem(complete_digraph(4), Z2, 1.0)
    x = np.array([0, 1, 1, 0])
    y = sample_observations(prob, x, np.random.default_rng(0))
    assert edge_errors(trivial_estimator(y), edge_differences(prob, x)) == prob.graph.n_edges


# --- triangle --------------------------------------------------------------

def test_votes_noiseless():
    prob = SyncProblem(complete_digraph(4), S3, 0.0)
    x = np.array([1, 4, 2, 5])
    y = edge_differences(prob, x)
    for u, v in prob.graph.edges.tolist():
        tally = triangle_votes(prob, y, (u, v))
        truth = S3.mul[S3.inv[x[u]], x[v]]
        assert tally.counts[truth] == 2
        assert tally.total == 2
        assert tally.winner() == truth


def test_votes_full_flip_z2():
    prob = SyncProblem(complete_digraph(5), Z2, 1.0)
    x = np.array([0, 1, 1, 0, 1])
    y = sample_observations(prob, x, np.random.default_rng(1))
    for u, v in prob.graph.edges.tolist():
        tally = triangle_votes(prob, y, (u, v))
        assert tally.counts[x[u] ^ x[v]] == 3


def test_votes_brute_force_and_total():
    rng = np.random.default_rng(4)
    prob = SyncProblem(complete_digraph(6), S3, 0.5)
    x = sample_vertex_labels(prob, rng)
    y = sample_observations(prob, x, rng)
    g = prob.graph
    for u, v in g.edges.tolist():
        want = np.zeros(6, dtype=int)
        for w in range(6):
            if w in (u, v):
                continue
            want[S3.mul[y[edge_index(g, u, w)], y[edge_index(g, w, v)]]] += 1
        tally = triangle_votes(prob, y, (u, v))
        assert np.array_equal(tally.counts, want)
        assert tally.total == 4


def test_triangle_estimator_matches_votes():
    rng = np.random.default_rng(9)
    prob = SyncProblem(complete_digraph(7), make_cyclic(4), 0.6)
    x = sample_vertex_labels(prob, rng)
    y = sample_observations(prob, x, rng)
    est = triangle_estimator(prob, y)
    for k, (u, v) in enumerate(prob.graph.edges.tolist()):
        assert est[k] == triangle_votes(prob, y, (u, v)).winner()


def test_triangle_noiseless_is_exact():
    prob = SyncProblem(complete_digraph(8), S3, 0.0)
    x = sample_vertex_labels(prob, np.random.default_rng(2))
    y = sample_observations(prob, x, np.random.default_rng(3))
    assert exact_recovery(triangle_estimator(prob, y), edge_differences(prob, x))


def test_triangle_tie_break():
    # K_5 with |G| = 3: edge (0, 1) gets one vote for each element
    prob = SyncProblem(complete_digraph(5), Z3, 0.5)
    g = prob.graph
    y = np.zeros(g.n_edges, dtype=int)
    # products y(0,w) y(w,1) for w = 2, 3, 4 are 2, 1, 0
    y[edge_index(g, 0, 2)] = 2
    y[edge_index(g, 0, 3)] = 1
    tally = triangle_votes(prob, y, (0, 1))
    assert tally.counts.tolist() == [1, 1, 1]
    assert triangle_estimator(prob, y)[edge_index(g, 0, 1)] == 0


def test_triangle_requires_complete():
    prob = SyncProblem(lattice_digraph(3, 2), Z2, 0.1)
    with pytest.raises(UnsupportedGraphError):
        triangle_estimator(prob, np.zeros(prob.graph.n_edges, dtype=int))
    prob = SyncProblem(complete_digraph(2), Z2, 0.1)
    with pytest.raises(UnsupportedGraphError):
        triangle_votes(prob, [0, 0], (0, 1))
    prob = SyncProblem(complete_digraph(4), Z2, 0.1)
    with pytest.raises(ShapeError):
        triangle_votes(prob, np.zeros(12, dtype=int), (1, 1))


def test_triangle_translation_invariance():
    rng = np.random.default_rng(12)
    prob = SyncProblem(complete_digraph(9), S3, 0.3)
    x = sample_vertex_labels(prob, rng)
    y_rng_state = np.random.default_rng(99)
    y = sample_observations(prob, x, y_rng_state)
    for g in range(6):
        y2 = sample_observations(prob, translate(S3, g, x), np.random.default_rng(99))
        assert np.array_equal(y, y2)
        assert np.array_equal(triangle_estimator(prob, y), triangle_estimator(prob, y2))


def _edge_error_prob_z2(n, p):
    """Exact per-edge error of the triangle estimator for |G| = 2: the truth
    loses the plurality, or ties and is element 1 (probability 1/2)."""
    m, f = n - 2, 1 - 2 * p + 2 * p * p
    pe = binom.cdf((m - 1) // 2, m, f)
    if m % 2 == 0:
        pe += 0.5 * binom.pmf(m // 2, m, f)
    return pe


def test_triangle_recovery_k30():
    n, p, trials = 30, 0.1, 200
    prob = SyncProblem(complete_digraph(n), Z2, p)
    hits, errors = 0, 0
    for seed in range(trials):
        x, y = sample_trial(prob, seed)
        est, truth = triangle_estimator(prob, y), edge_differences(prob, x)
        hits += exact_recovery(est, truth)
        errors += edge_errors(est, truth)
    pe = _edge_error_prob_z2(n, p)
    expected_errors = n * (n - 1) * pe
    assert expected_errors < 0.1
    # union bound: P(success) >= 1 - |E| pe
    floor = 1 - expected_errors
    assert hits / trials >= floor - 3 * math.sqrt(floor * (1 - floor) / trials)
    assert errors / trials <= expected_errors + 3 * math.sqrt(expected_errors / trials)


# --- orbits ------------------------------------------------------------------

def test_same_orbit_examples():
    x = np.array([0, 2, 1, 3, 5])
    assert same_orbit(S3, x, x)
    for g in range(6):
        assert same_orbit(S3, x, translate(S3, g, x))
    assert not same_orbit(Z2, [0, 0], [0, 1])
    with pytest.raises(ShapeError):
        same_orbit(Z2, [0], [0, 1])


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([Z2, Z3, S3, direct_product(Z2, Z3)]), st.data())
def test_canonical_representative(group, data):
    n = data.draw(st.integers(1, 6))
    x = np.array(data.draw(st.lists(st.integers(0, group.order - 1), min_size=n, max_size=n)))
    rep = canonical_representative(group, x)
    assert rep[0] == group.identity
    assert same_orbit(group, x, rep)
    # exactly one orbit member is gauge-fixed
    members = {tuple(translate(group, g, x)) for g in range(group.order)}
    assert len(members) == group.order
    assert sum(m[0] == group.identity for m in members) == 1


# --- MAP ---------------------------------------------------------------------

def test_map_single_edge():
    prob = SyncProblem(from_edges(2, [(0, 1)]), Z2, 0.25)
    orbit = map_estimator(prob, [1])
    assert isinstance(orbit, Orbit)
    assert orbit.representative.tolist() == [0, 1]


def test_map_path_example():
    prob = SyncProblem(path_digraph(3), Z2, 0.25)
    assert map_edge_estimator(prob, [1, 0]).tolist() == [1, 0]


def test_map_noiseless_recovers():
    for graph in (path_digraph(5), cycle_digraph(5), lattice_digraph(3, 2)):
        prob = SyncProblem(graph, Z3, 0.0)
        x = sample_vertex_labels(prob, np.random.default_rng(0))
        y = edge_differences(prob, x)
        assert np.array_equal(map_edge_estimator(prob, y), y)


def test_map_tie_prefers_first_enumerated():
    # cycle of 3 with one inconsistent observation: all three single-edge fixes tie
    prob = SyncProblem(cycle_digraph(3), Z2, 0.2)
    rep = map_estimator(prob, [1, 0, 0]).representative
    assert rep.tolist() == [0, 0, 0]


def test_map_above_critical_prefers_disagreement():
    prob = SyncProblem(from_edges(2, [(0, 1)]), Z2, 0.9)
    assert map_estimator(prob, [1]).representative.tolist() == [0, 0]
    prob = SyncProblem(from_edges(2, [(0, 1)]), Z2, 1.0)
    assert map_estimator(prob, [1]).representative.tolist() == [0, 0]


def _oracle_max_loglik(prob, y):
    group, graph, p = prob.group, prob.graph, prob.flip_prob
    wrong = p / (group.order - 1)
    best = -math.inf
    for x in itertools.product(range(group.order), repeat=graph.n_vertices):
        s = 0.0
        for k, (u, v) in enumerate(graph.edges.tolist()):
            d = group.mul[group.inv[x[u]], x[v]]
            s += math.log(1 - p) if d == y[k] else math.log(wrong)
        best = max(best, s)
    return best


@pytest.mark.parametrize("seed", range(8))
def test_map_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    group = [Z2, Z3, S3][seed % 3]
    n = 4 if group is not S3 else 3
    graph = complete_digraph(n) if seed % 2 else lattice_digraph(2, 2)
    prob = SyncProblem(graph, group, float(rng.uniform(0.05, 0.9)))
    y = rng.integers(0, group.order, graph.n_edges)
    rep = map_estimator(prob, y).representative
    got = log_likelihood(prob, y, differences(group, graph, rep))
    assert got == pytest.approx(_oracle_max_loglik(prob, y), abs=1e-12)


def test_posterior_constant_on_orbits():
    rng = np.random.default_rng(5)
    prob = SyncProblem(cycle_digraph(4), S3, 0.3)
    y = rng.integers(0, 6, 4)
    for x in itertools.islice(itertools.product(range(6), repeat=4), 0, 1296, 37):
        vals = {log_likelihood(prob, y, edge_differences(prob, translate(S3, g, np.array(x)))) for g in range(6)}
        assert len(vals) == 1


def test_map_budget_and_connectivity():
    prob = SyncProblem(lattice_digraph(5, 2), Z2, 0.3)
    with pytest.raises(CapacityError):
        map_estimator(prob, np.zeros(prob.graph.n_edges, dtype=int))
    prob = SyncProblem(from_edges(4, [(0, 1), (2, 3)]), Z2, 0.3)
    with pytest.raises(UnsupportedGraphError):
        map_estimator(prob, [0, 0])


def test_map_chunking_matches_small_budget():
    # 3^10 configurations spans several enumeration chunks
    rng = np.random.default_rng(8)
    prob = SyncProblem(path_digraph(11), Z3, 0.3)
    x = sample_vertex_labels(prob, rng)
    y = sample_observations(prob, x, rng)
    # on a tree every y is consistent, so the MAP reproduces y exactly
    assert np.array_equal(map_edge_estimator(prob, y), y)


# --- scoring and dispatch ----------------------------------------------------

def test_exact_recovery_and_errors():
    assert exact_recovery([1, 2, 3], [1, 2, 3])
    assert not exact_recovery([1, 2, 3], [1, 0, 3])
    assert edge_errors([1, 2, 3], [1, 0, 0]) == 2
    with pytest.raises(ShapeError):
        exact_recovery([1], [1, 2])


def test_estimate_edges_dispatch():
    prob = SyncProblem(complete_digraph(4), Z2, 0.0)
    x = np.array([0, 1, 0, 1])
    y = edge_differences(prob, x)
    for name in ("trivial", "triangle", "map"):
        assert exact_recovery(estimate_edges(name, prob, y), y)
    with pytest.raises(ValueError):
        estimate_edges("spectral", prob, y)


# --- offset vertices ---------------------------------------------------------

def _plant_offset(prob, x, y, u0, g):
    shifted = offset_configuration(prob.group, x, u0, g)
    y = y.copy()
    for k in prob.graph.incident_edges(u0):
        y[k] = edge_differences(prob, shifted)[k]
    return y


def test_detect_planted_offset():
    prob = SyncProblem(lattice_digraph(4, 2), S3, 0.0)
    x = sample_vertex_labels(prob, np.random.default_rng(1))
    y = edge_differences(prob, x)
    for g in range(1, 6):
        assert detect_offset_vertex(S3, prob.graph, x, y, g, range(16)) is None
    y_planted = _plant_offset(prob, x, y, 3, 4)
    assert detect_offset_vertex(S3, prob.graph, x, y_planted, 4, range(16)) == 3
    assert detect_offset_vertex(S3, prob.graph, x, y_planted, 4, [0, 1, 2]) is None
    with pytest.raises(ValueError):
        detect_offset_vertex(S3, prob.graph, x, y, S3.identity, range(16))


def test_detect_matches_brute_force():
    # incoming edges must read x(w)^-1 x(u) g, outgoing (x(u) g)^-1 x(w)
    rng = np.random.default_rng(21)
    graph = lattice_digraph(3, 2)
    prob = SyncProblem(graph, S3, 0.9)
    for _ in range(300):
        x = sample_vertex_labels(prob, rng)
        y = sample_observations(prob, x, rng)
        g = int(rng.integers(1, 6))
        want = None
        for u in range(graph.n_vertices):
            ok = True
            for k in graph.incident_edges(u):
                a, b = graph.edges[k]
                if a == u:
                    expect = S3.mul[S3.inv[S3.mul[x[u], g]], x[b]]
                else:
                    expect = S3.mul[S3.mul[S3.inv[x[a]], x[u]], g]
                ok &= y[k] == expect
            if ok:
                want = u
                break
        assert detect_offset_vertex(S3, graph, x, y, g, range(graph.n_vertices)) == want


def test_isolated_vertex_never_offset():
    graph = from_edges(3, [(0, 1)])
    assert detect_offset_vertex(Z2, graph, [0, 0, 0], [0], 1, [2]) is None


@pytest.mark.parametrize("group", [Z2, Z3, S3])
def test_offset_beats_truth_by_exact_margin(group):
    rng = np.random.default_rng(group.order)
    graph = lattice_digraph(4, 2)
    p = 0.3
    prob = SyncProblem(graph, group, p)
    for trial in range(50):
        x = sample_vertex_labels(prob, rng)
        y = sample_observations(prob, x, rng)
        u0 = int(rng.integers(0, graph.n_vertices))
        g = int(rng.integers(1, group.order))
        y = _plant_offset(prob, x, y, u0, g)
        assert detect_offset_vertex(group, graph, x, y, g, [u0]) == u0
        shifted = offset_configuration(group, x, u0, g)
        a_true = agreement_count(y, edge_differences(prob, x))
        a_shift = agreement_count(y, edge_differences(prob, shifted))
        deg = len(graph.incident_edges(u0))
        assert a_shift - a_true == deg
        gain = log_likelihood(prob, y, edge_differences(prob, shifted)) - log_likelihood(prob, y, edge_differences(prob, x))
        assert gain == pytest.approx(deg * (math.log(1 - p) - math.log(p / (group.order - 1))), rel=1e-12)
        assert gain > 0


def test_improving_shift_contains_offset_event():
    rng = np.random.default_rng(3)
    graph = lattice_digraph(5, 2)
    prob = SyncProblem(graph, Z3, 0.35)
    seen = 0
    for _ in range(200):
        x = sample_vertex_labels(prob, rng)
        y = sample_observations(prob, x, rng)
        hit = find_improving_shift(prob, x, y)
        offset = any(detect_offset_vertex(Z3, graph, x, y, g, range(25)) is not None for g in (1, 2))
        if offset:
            seen += 1
            assert hit is not None
        if hit is not None:
            u, g = hit
            shifted = offset_configuration(Z3, x, u, g)
            assert log_likelihood(prob, y, differences(Z3, graph, shifted)) > log_likelihood(
                prob, y, differences(Z3, graph, x))
    assert seen > 0


def test_improving_shift_is_exhaustive_single_moves():
    rng = np.random.default_rng(17)
    graph = cycle_digraph(5)
    prob = SyncProblem(graph, S3, 0.4)
    for _ in range(100):
        x = sample_vertex_labels(prob, rng)
        y = sample_observations(prob, x, rng)
        base = agreement_count(y, differences(S3, graph, x))
        want = None
        for u in range(5):
            for g in range(1, 6):
                if agreement_count(y, differences(S3, graph, offset_configuration(S3, x, u, g))) > base:
                    want = (u, g)
                    break
            if want:
                break
        assert find_improving_shift(prob, x, y) == want


def test_improving_shift_none_at_critical():
    prob = SyncProblem(path_digraph(3), Z2, 0.5)
    assert find_improving_shift(prob, [0, 0, 0], [1, 1]) is None


def test_map_fails_whenever_offset_on_small_graph():
    rng = np.random.default_rng(0)
    prob = SyncProblem(cycle_digraph(6), Z2, 0.3)
    events = 0
    for _ in range(300):
        x = sample_vertex_labels(prob, rng)
        y = sample_observations(prob, x, rng)
        if detect_offset_vertex(Z2, prob.graph, x, y, 1, greedy_independent_set(prob.graph)) is not None:
            events += 1
            assert not exact_recovery(map_edge_estimator(prob, y), edge_differences(prob, x))
    assert events > 0
