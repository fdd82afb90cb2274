"""Named spaces used by tests and experiments.

Graph metrics are computed by Floyd-Warshall on tiny weighted graphs; this is a fixture
helper only, not a general graph facility.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .metric import FiniteMetricSpace, to_fraction


@dataclass(frozen=True)
class Fixture:
    name: str
    space: FiniteMetricSpace
    provenance: str


def shortest_path_metric(n: int, weighted_edges, labels=None) -> FiniteMetricSpace:
    """Graph metric of a connected graph given as ``[(i, j, length), ...]``."""
    big = None
    dist = [[Fraction(0) if i == j else big for j in range(n)] for i in range(n)]
    for i, j, w in weighted_edges:
        w = to_fraction(w)
        if dist[i][j] is None or w < dist[i][j]:
            dist[i][j] = dist[j][i] = w
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if dist[i][k] is None or dist[k][j] is None:
                    continue
                via = dist[i][k] + dist[k][j]
                if dist[i][j] is None or via < dist[i][j]:
                    dist[i][j] = via
    if any(x is None for row in dist for x in row):
        raise ValueError("graph is not connected")
    return FiniteMetricSpace(dist, labels)


def two_point(d=1) -> FiniteMetricSpace:
    return FiniteMetricSpace.from_edges(2, {(0, 1): d})


def triangle(a, b, c) -> FiniteMetricSpace:
    """Three points with ``d01 = a``, ``d02 = b``, ``d12 = c``."""
    return FiniteMetricSpace.from_edges(3, {(0, 1): a, (0, 2): b, (1, 2): c})


def complete_space(n: int, a=1) -> FiniteMetricSpace:
    return FiniteMetricSpace.from_edges(n, {p: a for p in itertools.combinations(range(n), 2)})


def tetrahedron(d12, d13, d14, d23, d24, d34) -> FiniteMetricSpace:
    """Four points given by the six distances in 1-based lexicographic edge order."""
    pairs = list(itertools.combinations(range(4), 2))
    return FiniteMetricSpace.from_edges(4, dict(zip(pairs, (d12, d13, d14, d23, d24, d34))))


def path_tree(lengths=(1, 1, 1)) -> FiniteMetricSpace:
    """Path graph whose consecutive edges have the given lengths."""
    n = len(lengths) + 1
    return shortest_path_metric(n, [(i, i + 1, w) for i, w in enumerate(lengths)])


def star_tree(lengths=(1, 1, 1)) -> FiniteMetricSpace:
    """Star graph: point 0 joined to each leaf by the given lengths."""
    n = len(lengths) + 1
    return shortest_path_metric(n, [(0, i + 1, w) for i, w in enumerate(lengths)])


def collinear(coords) -> FiniteMetricSpace:
    coords = [to_fraction(x) for x in coords]
    return FiniteMetricSpace([[abs(a - b) for b in coords] for a in coords])


def unit_square_graph() -> FiniteMetricSpace:
    return shortest_path_metric(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])


def k32_space(ell) -> FiniteMetricSpace:
    """``K_{3,2}`` with unit edges plus an edge of length ``ell`` joining the two-point side.

    Points ``0, 1, 2`` form the three-point side and ``3, 4`` the two-point side, so
    ``d(A_i, A_j) = 2``, ``d(A_i, B_k) = 1`` and ``d(B_1, B_2) = min(ell, 2)``.
    """
    edges = [(a, b, 1) for a in range(3) for b in (3, 4)] + [(3, 4, ell)]
    return shortest_path_metric(5, edges)


TETRA_EDGES = tuple(range(7, 13))


def standard_fixtures() -> list:
    return [
        Fixture("two-point", two_point(1), "two points at distance 1"),
        Fixture("triangle-345", triangle(3, 4, 5), "Euclidean 3-4-5 triangle"),
        Fixture("equilateral", complete_space(3, 1), "equilateral triangle, side 1"),
        Fixture("regular-tetrahedron", complete_space(4, 1), "regular tetrahedron, side 1"),
        Fixture("tetra-7-12", tetrahedron(*TETRA_EDGES), "tetrahedron with edges 7..12"),
        Fixture("path-tree", path_tree(), "4-vertex path, unit edges"),
        Fixture("star-tree", star_tree(), "4-vertex star, unit edges"),
        Fixture("collinear-4", collinear([0, 1, 2, 3]), "four collinear points"),
        Fixture("unit-square", unit_square_graph(), "4-cycle with graph metric"),
        Fixture("k32-3/2", k32_space(Fraction(3, 2)), "K_{3,2} plus an edge of length 3/2"),
    ]
