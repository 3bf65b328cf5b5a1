"""Closed-form two-hop probabilities and recovery / impossibility bounds.

Everything is evaluated in log space where exponents get large; results that
underflow are returned as 0.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateBoundError, DomainError


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"flip probability must lie in [0, 1], got {p}")
    return p


def _check_order(order: int) -> int:
    if int(order) != order or order < 2:
        raise DomainError(f"group order must be an integer >= 2, got {order}")
    return int(order)


def two_hop_correct_prob(p: float, order: int) -> float:
    """Probability that y(u,w) y(w,v) equals the true difference on (u,v)."""
    p, q = _check_p(p), _check_order(order)
    return 1.0 - 2.0 * p + p * p * q / (q - 1)


def two_hop_wrong_prob(p: float, order: int) -> float:
    """Probability that the two-hop product equals one particular wrong element."""
    p, q = _check_p(p), _check_order(order)
    return 2.0 * (p - p * p) / (q - 1) + p * p * (q - 2) / (q - 1) ** 2


def critical_flip_prob(order: int) -> float:
    """Flip probability at which every two-hop outcome is equally likely."""
    return 1.0 - 1.0 / _check_order(order)


@dataclass(frozen=True)
class TwoHopDistribution:
    flip_prob: float
    group_order: int
    p_correct: float
    p_each_wrong: float

    @property
    def correct_margin(self) -> float:
        """How far the correct-product probability sits above 1/|G|."""
        return self.p_correct - 1.0 / self.group_order

    @property
    def wrong_margin(self) -> float:
        """How far each wrong-product probability sits below 1/|G|."""
        return 1.0 / self.group_order - self.p_each_wrong

    @property
    def total(self) -> float:
        return self.p_correct + (self.group_order - 1) * self.p_each_wrong


def two_hop_distribution(p: float, order: int) -> TwoHopDistribution:
    return TwoHopDistribution(float(p), int(order), two_hop_correct_prob(p, order), two_hop_wrong_prob(p, order))


def log_recovery_failure_bound(n: int, p: float, order: int) -> float:
    if n < 3:
        raise DomainError(f"failure bound needs n >= 3, got {n}")
    dist = two_hop_distribution(p, order)
    eps, eps_hat = dist.correct_margin, dist.wrong_margin
    at_critical = math.isclose(dist.flip_prob, critical_flip_prob(order), rel_tol=0.0, abs_tol=1e-12)
    if at_critical or eps <= 0 or eps_hat <= 0:
        raise DegenerateBoundError(
            f"p={p} is the critical flip probability for order {order}; the bound is vacuous"
        )
    lam = min(eps * eps, eps_hat * eps_hat)
    return math.log(2.0 * n * (n - 1) * order) - 2.0 * lam * (n - 2)


def recovery_failure_bound(n: int, p: float, order: int) -> float:
    """Union/Hoeffding upper bound ``2n(n-1)|G| exp(-2 lambda (n-2))`` on the
    probability that the triangle estimator errs on some edge of K_n.

    May exceed 1 for small ``n``; it is returned unclipped.
    """
    return math.exp(log_recovery_failure_bound(n, p, order))


def decay_quantity(p: float, a: float, d: float, K: float) -> float:
    """``(1 - (p/K)^d)^a``."""
    if not 0.0 < p < 0.5:
        raise DomainError(f"p must lie in (0, 1/2), got {p}")
    if K <= 0.5:
        raise DomainError(f"K must exceed 1/2, got {K}")
    if a <= 0 or d <= 0:
        raise DomainError("a and d must be positive")
    return math.exp(a * math.log1p(-((p / K) ** d)))


def offset_exists_lower_bound(p: float, d: int, order: int, set_size: int) -> float:
    """Lower bound ``1 - (1 - (p/(|G|-1))^d)^|D|`` on the probability that some
    vertex of an independent set ``D`` has all its observations offset by a
    fixed element, when every degree is at most ``d``."""
    if not 0.0 < p < 0.5:
        raise DomainError(f"p must lie in (0, 1/2), got {p}")
    q = _check_order(order)
    if d < 1 or set_size < 1:
        raise DomainError("d and set_size must be >= 1")
    per_vertex = (p / (q - 1)) ** d
    return -math.expm1(set_size * math.log1p(-per_vertex))
