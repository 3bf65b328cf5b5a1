"""Finite-group synchronization on graphs: noisy observation model,
triangle and MAP estimators, closed-form bounds and Monte Carlo sweeps."""

from .bounds import (
    critical_flip_prob,
    decay_quantity,
    offset_exists_lower_bound,
    recovery_failure_bound,
    two_hop_correct_prob,
    two_hop_distribution,
    two_hop_wrong_prob,
)
from .estimators import (
    Orbit,
    VoteTally,
    detect_offset_vertex,
    estimate_edges,
    exact_recovery,
    map_estimator,
    same_orbit,
    triangle_estimator,
    triangle_votes,
    trivial_estimator,
)
from .graphs import (
    DiGraph,
    complete_digraph,
    greedy_independent_set,
    is_connected,
    lattice_digraph,
    max_degree,
)
from .groups import GroupTable, direct_product, inverse, make_cyclic, make_symmetric, mul
from .harness import ExperimentConfig, SweepResult, TrialResult, run_sweep, run_trial
from .model import SyncProblem, edge_differences, log_likelihood, sample_observations, sample_vertex_labels

__version__ = "0.1.0"
