"""Finite metric spaces with exact rational distances.

Points are indexed ``0..n-1`` throughout; index tuples produced by
:func:`enumerate_index_sets` follow the same convention.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import CapacityError, SamplingError

MAX_ISOMETRY_POINTS = 8
MAX_GENERIC_DEPTH = 6
MAX_GENERIC_EDGES = 45


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction or exact string ("p/q", "1.25", "3e-2") to a Fraction.

    Floats are refused: a binary float is almost never the distance the user meant.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a distance")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


@dataclass(frozen=True)
class FiniteMetricSpace:
    d: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(x) for x in row) for row in self.d)
        n = len(rows)
        if n < 1 or any(len(row) != n for row in rows):
            raise ValueError("distance matrix must be square")
        object.__setattr__(self, "d", rows)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != n:
                raise ValueError("labels must have one entry per point")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_edges(cls, n: int, lengths: dict, labels=None) -> "FiniteMetricSpace":
        """Build from ``{(i, j): length}`` over all pairs ``i < j``."""
        d = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), value in lengths.items():
            d[i][j] = d[j][i] = to_fraction(value)
        return cls(d, labels)

    @property
    def n(self) -> int:
        return len(self.d)

    def edges(self) -> list:
        """``[((i, j), d_ij)]`` for ``i < j`` in lexicographic order."""
        return [((i, j), self.d[i][j]) for i, j in itertools.combinations(range(self.n), 2)]

    def edge_lengths(self) -> list:
        return sorted(self.d[i][j] for i, j in itertools.combinations(range(self.n), 2))

    def min_edge(self) -> Fraction:
        return min(self.d[i][j] for i, j in itertools.combinations(range(self.n), 2))

    def max_edge(self) -> Fraction:
        return max(self.d[i][j] for i, j in itertools.combinations(range(self.n), 2))

    def permuted(self, perm: Sequence[int]) -> "FiniteMetricSpace":
        """The space with ``d'[i][j] = d[perm[i]][perm[j]]``."""
        labels = None if self.labels is None else tuple(self.labels[p] for p in perm)
        return FiniteMetricSpace(
            tuple(tuple(self.d[pi][pj] for pj in perm) for pi in perm), labels
        )

    def scaled(self, factor) -> "FiniteMetricSpace":
        factor = to_fraction(factor)
        return FiniteMetricSpace(tuple(tuple(x * factor for x in row) for row in self.d), self.labels)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = field(default_factory=tuple)


def validate(space: FiniteMetricSpace) -> ValidationReport:
    """Check zero diagonal, symmetry, positivity and every triangle inequality."""
    d, n = space.d, space.n
    found = []
    for i in range(n):
        if d[i][i] != 0:
            found.append(("diagonal", (i,)))
    for i, j in itertools.combinations(range(n), 2):
        if d[i][j] != d[j][i]:
            found.append(("symmetry", (i, j)))
        if d[i][j] <= 0 or d[j][i] <= 0:
            found.append(("positivity", (i, j)))
    # witness (i, k, j): d[i][k] exceeds d[i][j] + d[j][k]
    for i, k in itertools.combinations(range(n), 2):
        for j in range(n):
            if j in (i, k):
                continue
            if d[i][j] + d[j][k] < d[i][k]:
                found.append(("triangle", (i, k, j)))
    return ValidationReport(not found, tuple(found))


def satisfies_svti(space: FiniteMetricSpace) -> bool:
    return space.max_edge() < 2 * space.min_edge()


def lengths_p_generic(lengths: Sequence, p: int) -> bool:
    """True iff distinct multisets of at most ``p`` entries of ``lengths`` have distinct sums.

    Entries are treated as labelled edges, so two equal lengths already fail at ``p = 1``.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if p > MAX_GENERIC_DEPTH or len(lengths) > MAX_GENERIC_EDGES:
        raise CapacityError(
            f"p-genericity check limited to p <= {MAX_GENERIC_DEPTH} and "
            f"N <= {MAX_GENERIC_EDGES} (got p={p}, N={len(lengths)})"
        )
    seen = set()
    for size in range(1, p + 1):
        for combo in itertools.combinations_with_replacement(range(len(lengths)), size):
            total = sum((lengths[i] for i in combo), Fraction(0))
            if total in seen:
                return False
            seen.add(total)
    return True


def is_p_generic(space: FiniteMetricSpace, p: int) -> bool:
    return lengths_p_generic([length for _, length in space.edges()], p)


def are_isometric(a: FiniteMetricSpace, b: FiniteMetricSpace) -> Optional[tuple]:
    """Return ``sigma`` with ``a.d[i][j] == b.d[sigma[i]][sigma[j]]``, or None."""
    n = a.n
    if n != b.n:
        return None
    if n > MAX_ISOMETRY_POINTS:
        raise CapacityError(f"isometry search is capped at n = {MAX_ISOMETRY_POINTS}")
    sig_a = [sorted(row) for row in a.d]
    sig_b = [sorted(row) for row in b.d]
    if sorted(map(tuple, sig_a)) != sorted(map(tuple, sig_b)):
        return None
    candidates = [[j for j in range(n) if sig_b[j] == sig_a[i]] for i in range(n)]
    sigma = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            return True
        for j in candidates[i]:
            if used[j]:
                continue
            if all(a.d[i][k] == b.d[j][sigma[k]] for k in range(i)):
                sigma[i] = j
                used[j] = True
                if extend(i + 1):
                    return True
                used[j] = False
        sigma[i] = -1
        return False

    return tuple(sigma) if extend(0) else None


def invert_permutation(perm: Sequence[int]) -> tuple:
    inverse = [0] * len(perm)
    for i, p in enumerate(perm):
        inverse[p] = i
    return tuple(inverse)


def canonical_form(space: FiniteMetricSpace) -> tuple:
    """Lexicographically smallest upper-triangle distance tuple over all relabelings."""
    if space.n > MAX_ISOMETRY_POINTS:
        raise CapacityError(f"canonical form is capped at n = {MAX_ISOMETRY_POINTS}")
    pairs = list(itertools.combinations(range(space.n), 2))
    return min(
        tuple(space.d[p[i]][p[j]] for i, j in pairs)
        for p in itertools.permutations(range(space.n))
    )


def random_metric_space(
    n: int,
    seed,
    svti: bool = False,
    min_gap=None,
    denominator: int = 1000,
    max_tries: int = 10_000,
) -> FiniteMetricSpace:
    """Sample a labelled metric space with distances on the grid ``k / denominator``.

    With ``svti`` the distances are drawn from ``[1, 2)``, which satisfies the strict
    virtual triangle inequality (and hence every triangle inequality) by construction.
    Otherwise they come from ``[1, 3)`` and triangle violations are rejected.
    ``min_gap`` rejects samples where two distances are closer than the gap.
    """
    if n < 2:
        raise ValueError("need at least two points")
    rng = random.Random(seed)
    span = 1 if svti else 2
    pairs = list(itertools.combinations(range(n), 2))
    gap = None if min_gap is None else to_fraction(min_gap)
    for _ in range(max_tries):
        values = [1 + Fraction(rng.randrange(span * denominator), denominator) for _ in pairs]
        if gap is not None:
            ordered = sorted(values)
            if any(b - a < gap for a, b in zip(ordered, ordered[1:])):
                continue
        space = FiniteMetricSpace.from_edges(n, dict(zip(pairs, values)))
        if svti or validate(space).ok:
            return space
    raise SamplingError(f"no admissible {n}-point space after {max_tries} draws")


INDEX_SET_KINDS = (
    "triangles",
    "open2paths",
    "open3paths",
    "simple_open3paths",
    "opposite_pairs",
    "vertex_stars",
    "kstep_paths",
)


def _chain_distinct(seq) -> bool:
    return all(a != b for a, b in zip(seq, seq[1:]))


def enumerate_index_sets(n: int, kind: str, k: Optional[int] = None) -> list:
    """Index tuples (0-based, lexicographic) of the path/cycle families used by the expansion.

    ``opposite_pairs`` is the general disjoint-edge-pair family; for ``n = 4`` it is the
    three pairs of opposite edges. ``vertex_stars`` gives ``(i, j, k, l)`` with
    ``j < k < l`` three other points joined to ``i``.
    """
    pts = range(n)
    if kind == "triangles":
        return list(itertools.combinations(pts, 3))
    if kind == "open2paths":
        return [t for t in itertools.product(pts, repeat=3) if _chain_distinct(t) and t[0] < t[2]]
    if kind == "open3paths":
        return [t for t in itertools.product(pts, repeat=4) if _chain_distinct(t) and t[0] < t[3]]
    if kind == "simple_open3paths":
        return [t for t in itertools.permutations(pts, 4) if t[0] < t[3]]
    if kind == "opposite_pairs":
        out = []
        for (i, j), (kk, ll) in itertools.product(itertools.combinations(pts, 2), repeat=2):
            if {i, j}.isdisjoint((kk, ll)) and i < kk:
                out.append((i, j, kk, ll))
        return out
    if kind == "vertex_stars":
        return [(i,) + rest for i in pts for rest in itertools.combinations([p for p in pts if p != i], 3)]
    if kind == "kstep_paths":
        if k is None or k < 0:
            raise ValueError("kstep_paths needs k >= 0")
        return [t for t in itertools.product(pts, repeat=k + 1) if _chain_distinct(t)]
    raise ValueError(f"unknown index-set kind {kind!r}; expected one of {INDEX_SET_KINDS}")


def path_sum(space: FiniteMetricSpace, path: Iterable[int]) -> Fraction:
    path = list(path)
    return sum((space.d[a][b] for a, b in zip(path, path[1:])), Fraction(0))
