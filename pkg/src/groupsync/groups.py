"""Finite groups as explicit Cayley tables.

Elements are dense integer indices ``0..order-1``.  The constructors fix a
canonical enumeration (residues ascending for cyclic groups, lexicographic
one-line notation for symmetric groups) so argmax tie-breaking downstream is
reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityError, InvalidOrderError

MAX_SYMMETRIC_DEGREE = 5
MAX_PRODUCT_ORDER = 10_000


@dataclass(frozen=True, eq=False)
class GroupTable:
    """A finite group given by its multiplication table.

    ``mul[a, b]`` is the index of ``a*b``; ``inv[a]`` the index of ``a^-1``.
    Arrays are made read-only on construction.
    """

    mul: np.ndarray
    inv: np.ndarray
    identity: int
    labels: Optional[tuple[str, ...]] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        mul = np.array(self.mul, dtype=np.int64)
        inv = np.array(self.inv, dtype=np.int64)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
            raise InvalidOrderError(f"multiplication table must be square and non-empty, got {mul.shape}")
        if inv.shape != (mul.shape[0],):
            raise InvalidOrderError("inverse table length must equal the group order")
        mul.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul", mul)
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "identity", int(self.identity))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    def elements(self) -> range:
        return range(self.order)

    def non_identity(self) -> np.ndarray:
        """Non-identity elements in ascending index order."""
        idx = np.arange(self.order)
        return idx[idx != self.identity]

    def label(self, a: int) -> str:
        if self.labels is None:
            return str(a)
        return self.labels[a]

    def __repr__(self):
        return f"GroupTable(name={self.name!r}, order={self.order})"


def _check_index(t: GroupTable, a) -> int:
    a = int(a)
    if not 0 <= a < t.order:
        raise IndexError(f"element index {a} out of range for group of order {t.order}")
    return a


def mul(t: GroupTable, a: int, b: int) -> int:
    return int(t.mul[_check_index(t, a), _check_index(t, b)])


def inverse(t: GroupTable, a: int) -> int:
    return int(t.inv[_check_index(t, a)])


def make_cyclic(n: int) -> GroupTable:
    """Z/nZ under addition; element ``i`` is the residue ``i``."""
    if n < 1:
        raise InvalidOrderError(f"cyclic group order must be >= 1, got {n}")
    idx = np.arange(n)
    table = (idx[:, None] + idx[None, :]) % n
    inv = (-idx) % n
    return GroupTable(table, inv, 0, tuple(str(i) for i in range(n)), name=f"cyclic:{n}")


def make_symmetric(k: int) -> GroupTable:
    """The symmetric group S_k, elements in lexicographic one-line order.

    The product ``a*b`` is composition ``a∘b``, i.e. ``(a*b)(i) = a(b(i))``.
    """
    if not 1 <= k <= MAX_SYMMETRIC_DEGREE:
        raise InvalidOrderError(f"symmetric degree must be in 1..{MAX_SYMMETRIC_DEGREE}, got {k}")
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(perms):
        for j, b in enumerate(perms):
            table[i, j] = index[tuple(a[b[s]] for s in range(k))]
    inv = np.empty(n, dtype=np.int64)
    for i, a in enumerate(perms):
        ainv = [0] * k
        for s, t in enumerate(a):
            ainv[t] = s
        inv[i] = index[tuple(ainv)]
    labels = tuple("".join(str(s + 1) for s in p) for p in perms)
    return GroupTable(table, inv, index[tuple(range(k))], labels, name=f"sym:{k}")


def direct_product(a: GroupTable, b: GroupTable) -> GroupTable:
    """Componentwise product; element ``(i, j)`` has index ``i*|b| + j``."""
    order = a.order * b.order
    if order > MAX_PRODUCT_ORDER:
        raise CapacityError(f"product order {order} exceeds {MAX_PRODUCT_ORDER}")
    ia = np.repeat(np.arange(a.order), b.order)
    ib = np.tile(np.arange(b.order), a.order)
    table = a.mul[ia[:, None], ia[None, :]] * b.order + b.mul[ib[:, None], ib[None, :]]
    inv = a.inv[ia] * b.order + b.inv[ib]
    labels = tuple(f"({a.label(i)},{b.label(j)})" for i, j in zip(ia, ib))
    return GroupTable(table, inv, a.identity * b.order + b.identity, labels,
                      name=f"{a.name or 'A'}*{b.name or 'B'}")


def element_order(t: GroupTable, a: int) -> int:
    """Smallest k >= 1 with a^k = e."""
    a = _check_index(t, a)
    k, cur = 1, a
    while cur != t.identity:
        cur = int(t.mul[cur, a])
        k += 1
    return k


def axiom_violations(t: GroupTable) -> list[str]:
    """Exhaustively check closure, identity, inverses and associativity.

    Returns a list of human-readable violations (empty when ``t`` is a group).
    """
    n = t.order
    m = t.mul
    problems = []
    if m.min() < 0 or m.max() >= n or t.inv.min() < 0 or t.inv.max() >= n:
        problems.append("closure: table entry out of range")
        return problems
    if not 0 <= t.identity < n:
        problems.append("identity index out of range")
        return problems
    idx = np.arange(n)
    e = t.identity
    if not (np.array_equal(m[e], idx) and np.array_equal(m[:, e], idx)):
        problems.append("identity: e*a or a*e differs from a")
    if not (np.all(m[idx, t.inv] == e) and np.all(m[t.inv, idx] == e)):
        problems.append("inverses: a*a^-1 or a^-1*a differs from e")
    # (a*b)*c vs a*(b*c), all triples at once
    left = m[m]
    right = m[idx[:, None, None], m[None, :, :]]
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = bad[0]
        problems.append(f"associativity fails, e.g. at ({a}, {b}, {c})")
    return problems


def rows_are_permutations(t: GroupTable) -> bool:
    """Left cancellation: every row of the table is a permutation."""
    s = np.sort(t.mul, axis=1)
    return bool(np.all(s == np.arange(t.order)))


def format_table(t: GroupTable) -> str:
    """Debug dump: one row of space-separated indices per line."""
    return "\n".join(" ".join(str(int(v)) for v in row) for row in t.mul) + "\n"


def parse_group_spec(spec: str) -> GroupTable:
    """Build a group from ``cyclic:K``, ``sym:K`` or ``prod:SPEC,SPEC[,...]``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind in ("cyclic", "z"):
            return make_cyclic(int(arg))
        if kind in ("sym", "symmetric", "s"):
            return make_symmetric(int(arg))
        if kind == "prod":
            parts = [p for p in arg.split(",") if p]
            if len(parts) < 2:
                raise ValueError("prod needs at least two factors")
            out = parse_group_spec(parts[0])
            for p in parts[1:]:
                out = direct_product(out, parse_group_spec(p))
            return GroupTable(out.mul, out.inv, out.identity, out.labels, name=spec)
    except ValueError as exc:
        if isinstance(exc, (InvalidOrderError, CapacityError)):
            raise
        raise InvalidOrderError(f"bad group spec {spec!r}: {exc}") from exc
    raise InvalidOrderError(f"unknown group kind in spec {spec!r}")
