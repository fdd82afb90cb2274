"""Recover a finite metric space from magnitude data.

Routes:

* ``n3``            three points, from the exact limits ``M_1, M_2, M_3`` at ``t -> 0+``;
* ``ri``            edge lengths as successive generators of the exponent monoid, then
                    triangle / open 3-path sums, then assembly of the labelled space;
* ``svti_generic``  same, but the edges are read off as the ``N`` smallest exponents;
* ``n4_svti``       four points under the strict virtual triangle inequality:
                    edges, opposite-pair sums, opposite pairing, and a final swap decided
                    by ``M_1``.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import sympy

from .errors import (
    AmbiguityError,
    CaseResolutionError,
    DegenerateError,
    ExhaustionError,
    InconsistencyError,
    MismatchError,
    MultiplicityError,
    ReconstructionError,
    SvtiViolationError,
)
from .formal import (
    ExtractionResult,
    extract_series_from_samples,
    f_from_series,
    g_from_f,
    g_series,
    path_expansion,
    sampler_from_grid,
)
from .metric import (
    MAX_GENERIC_DEPTH,
    FiniteMetricSpace,
    are_isometric,
    canonical_form,
    enumerate_index_sets,
    lengths_p_generic,
    satisfies_svti,
    validate,
)
from .numeric import SampleGrid
from .series import INF, GeneralizedSeries
from .small_scale import AsymptoticDerivatives, m1_n4_closed, n3_invariants

log = logging.getLogger(__name__)


# --- data types -------------------------------------------------------------------------


@dataclass(frozen=True)
class N3Invariants:
    x: Fraction
    y: Fraction
    z: Fraction
    s1: Fraction
    s2: Fraction
    s3: Fraction

    @classmethod
    def from_sides(cls, a, b, c) -> "N3Invariants":
        x, y, z = b + c - a, c + a - b, a + b - c
        s1, s2, s3 = n3_invariants(a, b, c)
        return cls(x, y, z, s1, s2, s3)


@dataclass(frozen=True)
class EdgeLengthMultiset:
    lengths: tuple

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(sorted(Fraction(x) for x in self.lengths)))

    def __len__(self):
        return len(self.lengths)


@dataclass(frozen=True)
class TripleSumData:
    triangle_sums: tuple
    open3path_sums: tuple
    triangle_triples: tuple = ()
    open3path_triples: tuple = ()


@dataclass(frozen=True)
class OppositePairing:
    pairs: tuple
    sums: tuple
    cubic_sums: tuple
    comb_choice: str
    alternatives: tuple = ()

    @classmethod
    def from_pairs(cls, pairs, comb_choice: str, alternatives=()) -> "OppositePairing":
        pairs = tuple(sorted(tuple(sorted(p)) for p in pairs))
        sums = tuple(sorted(a + b for a, b in pairs))
        cubic = tuple(sorted([2 * a + b for a, b in pairs] + [a + 2 * b for a, b in pairs]))
        return cls(pairs, sums, cubic, comb_choice, tuple(alternatives))


@dataclass
class Certificate:
    applied: str = ""
    checks: list = field(default_factory=list)
    case_path: list = field(default_factory=list)

    def check(self, name: str, passed: bool, detail=None):
        entry = {"name": name, "passed": bool(passed)}
        if detail is not None:
            entry["detail"] = str(detail)
        self.checks.append(entry)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReconstructionResult:
    space: FiniteMetricSpace
    certificate: Certificate


# --- three points -----------------------------------------------------------------------


def n3_invariants_from_derivatives(m: AsymptoticDerivatives) -> tuple:
    m1, m2, m3 = m.M1, m.M2, m.M3
    if not m1 > 0:
        raise DegenerateError("M1 must be positive for a three-point space")
    w = 16 * m1 ** 4 + 24 * m1 ** 2 * m2 + 8 * m1 * m3 - 7 * m2 ** 2
    s1 = (4 * m1 ** 2 + m2) / m1
    s2 = w / (3 * m1 ** 2)
    s3 = m2 * w / (3 * m1 ** 3)
    return s1, s2, s3


def solve_side_cubic(e1, e2, e3):
    """Roots of ``x^3 - e1 x^2 + e2 x - e3``.

    Returns ``(roots, exact)``: Fractions when the cubic splits over the rationals,
    otherwise 40-digit mpmath reals (``exact = False``).
    """
    x = sympy.Symbol("x")
    poly = sympy.Poly(
        [1, -sympy.Rational(e1.numerator, e1.denominator),
         sympy.Rational(e2.numerator, e2.denominator),
         -sympy.Rational(e3.numerator, e3.denominator)],
        x, domain="QQ",
    )
    roots = []
    for factor, mult in poly.factor_list()[1]:
        if factor.degree() == 1:
            c1, c0 = factor.all_coeffs()
            r = -c0 / c1
            roots += [Fraction(int(r.p), int(r.q))] * mult
    if len(roots) == 3:
        return sorted(roots), True
    with mpmath.workdps(40):
        approx = mpmath.polyroots([1, -mpmath.mpf(e1.numerator) / e1.denominator,
                                   mpmath.mpf(e2.numerator) / e2.denominator,
                                   -mpmath.mpf(e3.numerator) / e3.denominator], maxsteps=200, extraprec=200)
        if any(abs(mpmath.im(r)) > mpmath.mpf(10) ** -30 for r in approx):
            raise DegenerateError("side cubic has non-real roots")
        return sorted(mpmath.re(r) for r in approx), False


def reconstruct_n3(m: AsymptoticDerivatives) -> FiniteMetricSpace:
    """Recover the three side lengths from the first three derivative limits at ``t = 0``."""
    s1, s2, s3 = n3_invariants_from_derivatives(m)
    e1 = s1
    e2 = (s1 ** 2 + s2) / 4
    e3 = (s1 * s2 - s3) / 8
    roots, exact = solve_side_cubic(e1, e2, e3)
    if not exact:
        raise DegenerateError(
            "side cubic is irreducible over the rationals; approximate roots "
            + ", ".join(mpmath.nstr(r, 35) for r in roots)
        )
    a, b, c = roots
    if a <= 0:
        raise DegenerateError(f"non-positive side length {a}")
    if c > a + b:
        raise DegenerateError(f"sides {a}, {b}, {c} violate the triangle inequality")
    return FiniteMetricSpace.from_edges(3, {(0, 1): a, (0, 2): b, (1, 2): c})


def approximate_n3_sides(m: AsymptoticDerivatives) -> list:
    """High-precision side lengths when the cubic does not split over the rationals.

    Each side is returned as ``(low, high)`` with width at most ``1e-30``.
    """
    s1, s2, s3 = n3_invariants_from_derivatives(m)
    roots, _ = solve_side_cubic(s1, (s1 ** 2 + s2) / 4, (s1 * s2 - s3) / 8)
    with mpmath.workdps(40):
        eps = mpmath.mpf(10) ** -31
        roots = [mpmath.mpf(r.numerator) / r.denominator if isinstance(r, Fraction) else r for r in roots]
        return [(r - eps, r + eps) for r in roots]


# --- edges from the series --------------------------------------------------------------


def _positive_terms(series: GeneralizedSeries):
    return [(e, c) for e, c in series.terms if e > 0]


def in_monoid(value: Fraction, generators: Sequence[Fraction]) -> bool:
    """Is ``value`` a non-negative integer combination of ``generators``? (bounded knapsack)"""
    gens = tuple(sorted(generators, reverse=True))

    @functools.lru_cache(maxsize=None)
    def reach(rem, idx):
        if rem == 0:
            return True
        if idx == len(gens):
            return False
        g = gens[idx]
        for tau in range(int(rem // g) + 1):
            if reach(rem - tau * g, idx + 1):
                return True
        return False

    return reach(Fraction(value), 0)


def edges_from_series_ri(series: GeneralizedSeries, N: int) -> EdgeLengthMultiset:
    """Edge lengths as the successive smallest exponents outside the span of those found."""
    found = []
    for e, _ in _positive_terms(series):
        if not in_monoid(e, found):
            found.append(e)
            if len(found) == N:
                return EdgeLengthMultiset(tuple(found))
    raise ExhaustionError(
        f"only {len(found)} of {N} independent exponents below {series.exact_below}"
    )


def edges_from_series_svti(series: GeneralizedSeries, N: int) -> EdgeLengthMultiset:
    """Edge lengths as the first exponents, with multiplicity ``coefficient / -2``."""
    found = []
    for e, c in _positive_terms(series):
        if len(found) >= N:
            break
        mult = -c / 2
        if mult.denominator != 1 or mult <= 0:
            raise MultiplicityError(f"coefficient {c} at exponent {e} is not a negative even integer")
        found += [e] * int(mult)
    if len(found) < N:
        raise ExhaustionError(f"only {len(found)} of {N} edges below {series.exact_below}")
    if len(found) > N:
        raise MultiplicityError(f"multiplicities overshoot: {len(found)} edges for N = {N}")
    if not max(found) < 2 * min(found):
        raise SvtiViolationError(f"recovered edges violate svti: max {max(found)} >= 2 * {min(found)}")
    return EdgeLengthMultiset(tuple(found))


def detect_complete_graph(series: GeneralizedSeries, n: int) -> Optional[Fraction]:
    """The common side length if the first non-constant term is ``-2 C(n,2) q^a``."""
    terms = _positive_terms(series)
    if not terms:
        raise ValueError("series has no positive-exponent term")
    e, c = terms[0]
    return e if c == -2 * math.comb(n, 2) else None


# --- triangles and open 3-paths --------------------------------------------------------


def points_from_edge_count(N: int) -> int:
    n = (1 + math.isqrt(1 + 8 * N)) // 2
    if n * (n - 1) // 2 != N:
        raise InconsistencyError(f"{N} is not a triangular number of edges")
    return n


def open3path_count(n: int) -> int:
    return (n * (n - 1) ** 3 - n * (n - 1) * (n - 2)) // 2


def triple_sums_from_series(series: GeneralizedSeries, edges: EdgeLengthMultiset) -> TripleSumData:
    """Split the d-index 3 coefficients into triangle (-6) and open 3-path (-2) contributions."""
    lengths = list(edges.lengths)
    N = len(lengths)
    n = points_from_edge_count(N)
    threshold = series.exact_below
    if n == 3:
        return _triple_sums_n3(series, lengths)
    smallest = lengths[0]
    depth = 3
    while depth < MAX_GENERIC_DEPTH and (depth + 1) * smallest < threshold:
        depth += 1
    by_sum = {}
    for size in range(1, depth + 1):
        for combo in itertools.combinations_with_replacement(range(N), size):
            s = sum((lengths[i] for i in combo), Fraction(0))
            by_sum.setdefault(s, []).append(combo)
    triangles, paths = [], []
    for combo in itertools.combinations_with_replacement(range(N), 3):
        s = sum((lengths[i] for i in combo), Fraction(0))
        if not s < threshold:
            raise ExhaustionError(f"triple sum {s} is not below the exactness threshold {threshold}")
        c = series.coefficient(s)
        if len(by_sum[s]) > 1:
            if c != 0:
                raise AmbiguityError(f"exponent {s} is shared by several edge multisets; cannot split {c}")
            continue
        triple = tuple(lengths[i] for i in combo)
        if len(set(combo)) == 3:
            split = {0: (0, 0), -2: (0, 1), -6: (1, 0)}.get(c)
            if split is None:
                raise InconsistencyError(f"coefficient {c} at triple sum {s} fits no triangle/path split")
            t_count, p_count = split
        else:
            if c > 0 or c % 2:
                raise InconsistencyError(f"coefficient {c} at repeated-edge sum {s}")
            t_count, p_count = 0, int(-c // 2)
        triangles += [(s, triple)] * t_count
        paths += [(s, triple)] * p_count
    if len(triangles) != math.comb(n, 3):
        raise InconsistencyError(f"found {len(triangles)} triangles, expected {math.comb(n, 3)}")
    if len(paths) != open3path_count(n):
        raise InconsistencyError(f"found {len(paths)} open 3-paths, expected {open3path_count(n)}")
    return TripleSumData(
        tuple(sorted(s for s, _ in triangles)),
        tuple(sorted(s for s, _ in paths)),
        tuple(t for _, t in sorted(triangles)),
        tuple(t for _, t in sorted(paths)),
    )


def _triple_sums_n3(series, lengths):
    # three edges fix the triangle up to isometry, so the split is read from it directly
    space = FiniteMetricSpace.from_edges(3, {(0, 1): lengths[0], (0, 2): lengths[1], (1, 2): lengths[2]})
    if not _agree_below(_series_like(space, series.exact_below), series):
        raise InconsistencyError("series is not that of the triangle on the recovered edges")
    d = space.d
    paths = sorted(
        (d[i][j] + d[j][k] + d[k][l], tuple(sorted((d[i][j], d[j][k], d[k][l]))))
        for i, j, k, l in enumerate_index_sets(3, "open3paths")
    )
    total = sum(lengths, Fraction(0))
    return TripleSumData((total,), tuple(s for s, _ in paths), (tuple(lengths),), tuple(t for _, t in paths))


def assemble_from_triples(triangles: Sequence, open3paths: Sequence) -> FiniteMetricSpace:
    """Rebuild a labelled space from its triangle and open 3-path length triples.

    Requires pairwise distinct edge lengths.  Fix a base triangle ``P1 P2 P3`` on its
    shortest edge ``P1 P2``; every other triangle on that edge adds one point whose
    orientation is read from the middle edge of a simple open 3-path; the remaining
    distances close triangles through ``P1``.
    """
    triangles = [tuple(sorted(t)) for t in triangles]
    T = len(triangles)
    n = 3
    while math.comb(n, 3) < T:
        n += 1
    if math.comb(n, 3) != T:
        raise InconsistencyError(f"{T} triangles is not C(n, 3) for any n")
    values = sorted({x for t in triangles for x in t})
    if len(values) != math.comb(n, 2) or any(len(set(t)) != 3 for t in triangles):
        raise InconsistencyError("edge lengths are not pairwise distinct")
    if n == 3:
        a, b, c = triangles[0]
        return FiniteMetricSpace.from_edges(3, {(0, 1): a, (0, 2): b, (1, 2): c})

    tri_set = {frozenset(t) for t in triangles}
    co_triangular = {frozenset(p) for t in triangles for p in itertools.combinations(t, 2)}
    middle = {}
    for path in open3paths:
        if len(set(path)) != 3:
            continue
        key = frozenset(path)
        mids = [m for m in path if frozenset(set(path) - {m}) not in co_triangular]
        if len(mids) != 1:
            raise InconsistencyError(f"cannot identify the middle edge of open 3-path {sorted(path)}")
        middle[key] = mids[0]

    base = min(triangles)
    gamma = base[0]
    alpha, beta = base[1], base[2]  # d(P2,P3), d(P3,P1)
    to_p1 = {0: Fraction(0), 1: gamma, 2: beta}
    to_p2 = {0: gamma, 1: Fraction(0), 2: alpha}
    others = sorted(t for t in triangles if gamma in t and t != base)
    if len(others) != n - 3:
        raise InconsistencyError("wrong number of triangles on the base edge")
    for idx, tri in enumerate(others, start=3):
        lam, mu = [x for x in tri if x != gamma]
        mid = middle.get(frozenset((lam, mu, alpha)))
        if mid == lam:
            to_p1[idx], to_p2[idx] = mu, lam
        elif mid == mu:
            to_p1[idx], to_p2[idx] = lam, mu
        else:
            raise InconsistencyError(f"no open 3-path on lengths {lam}, {mu}, {alpha}")
    d = [[Fraction(0)] * n for _ in range(n)]
    for i in range(1, n):
        d[0][i] = d[i][0] = to_p1[i]
    for i in range(2, n):
        d[1][i] = d[i][1] = to_p2[i]
    for i, j in itertools.combinations(range(2, n), 2):
        closing = [x for x in values if frozenset((x, to_p1[i], to_p1[j])) in tri_set
                   and len({x, to_p1[i], to_p1[j]}) == 3]
        if len(closing) != 1:
            raise InconsistencyError(f"no unique edge closes the triangle P1 P{i + 1} P{j + 1}")
        d[i][j] = d[j][i] = closing[0]
    space = FiniteMetricSpace(d)
    report = validate(space)
    if not report.ok:
        raise InconsistencyError(f"assembled matrix is not a metric: {report.violations[:3]}")
    if sorted(map(tuple, (sorted(t) for t in _triangle_triples(space)))) != sorted(triangles):
        raise InconsistencyError("assembled space does not reproduce the triangle data")
    return space


def _triangle_triples(space):
    d = space.d
    return [(d[i][j], d[j][k], d[i][k]) for i, j, k in itertools.combinations(range(space.n), 3)]


# --- four points ------------------------------------------------------------------------


def _index_pairs_summing(lengths, value):
    return [(i, j) for i, j in itertools.permutations(range(len(lengths)), 2)
            if lengths[i] + lengths[j] == value]


def _perfect_matchings(items):
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for m in _perfect_matchings(rest):
            yield [(first, items[k])] + m


def _case2_sums(f: GeneralizedSeries, lengths):
    """The second-case opposite sums if the first term of ``f`` fits that pattern, else None."""
    terms = _positive_terms(f)
    if not terms or terms[0][1] != -2:
        return None
    e0 = terms[0][0]
    for a, b in _index_pairs_summing(lengths, e0):
        la, lb = lengths[a], lengths[b]
        rest = [i for i in range(6) if i not in (a, b)]
        for (g, h), (l, m) in _perfect_matchings(rest):
            for (g1, h1), (l1, m1) in (((g, h), (l, m)), ((l, m), (g, h))):
                if lengths[g1] + lengths[h1] != 2 * la + lb or lengths[l1] + lengths[m1] != la + 2 * lb:
                    continue
                cross = [lengths[x] + lengths[y] for x in (g1, h1) for y in (l1, m1)]
                if any(f.coefficient(s) in (-2, -4) for s in cross):
                    continue
                return sorted([e0, 2 * la + lb, la + 2 * lb])
    return None


def n4_opposite_sums(f: GeneralizedSeries, edges: EdgeLengthMultiset) -> tuple:
    """The three opposite-pair sums from the series ``f``.

    Returns ``(sums, case)`` with ``case`` either ``"case1"`` or ``"case2"``.
    """
    lengths = list(edges.lengths)
    if len(lengths) != 6:
        raise CaseResolutionError("four points need six edges")
    total = sum(lengths, Fraction(0))
    ceiling = lengths[4] + lengths[5]
    sums = _case2_sums(f, lengths)
    case = "case2"
    if sums is None:
        case = "case1"
        picked = []
        for e, c in _positive_terms(f):
            if len(picked) >= 2:
                break
            if c >= 0:
                continue
            if e > ceiling:
                raise CaseResolutionError(f"negative term at {e} exceeds every possible pair sum")
            k = -c / 2
            if k.denominator != 1:
                raise CaseResolutionError(f"odd coefficient {c} at {e}")
            picked += [e] * min(int(k), 2 - len(picked))
        if len(picked) < 2:
            raise CaseResolutionError("fewer than two opposite-pair terms survive in f")
        sums = sorted(picked + [total - sum(picked)])
    if sum(sums) != total:
        raise CaseResolutionError("opposite sums do not partition the total edge length")
    return tuple(sums), case


def matching_pairings(lengths, sums) -> list:
    """Distinct value-pairings of the six lengths whose pair sums equal ``sums``."""
    target = tuple(sorted(sums))
    seen = []
    for m in _perfect_matchings(list(range(6))):
        pairs = tuple(sorted(tuple(sorted((lengths[i], lengths[j]))) for i, j in m))
        if tuple(sorted(a + b for a, b in pairs)) == target and pairs not in seen:
            seen.append(pairs)
    return seen


def configurations(pairs) -> list:
    """The two labelled spaces realising an opposite pairing (differing by the d14/d23 swap)."""
    (a1, b1), (a2, b2), (a3, b3) = pairs
    out = []
    for x, y in ((a3, b3), (b3, a3)):
        d = {(0, 1): a1, (2, 3): b1, (0, 2): a2, (1, 3): b2, (0, 3): x, (1, 2): y}
        out.append(FiniteMetricSpace.from_edges(4, d))
    return out


def _agree_below(a: GeneralizedSeries, b: GeneralizedSeries) -> bool:
    below = min(a.exact_below, b.exact_below)
    return a.truncated(below).terms == b.truncated(below).terms


def _series_like(space: FiniteMetricSpace, exact_below) -> GeneralizedSeries:
    K = 0
    while (K + 1) * space.min_edge() < exact_below:
        K += 1
    return path_expansion(space, K).series.truncated(exact_below)


def n4_opposite_combination(g: GeneralizedSeries, edges: EdgeLengthMultiset, sums) -> OppositePairing:
    """Decide which edges are opposite, given the opposite-pair sums."""
    l = list(edges.lengths)
    candidates = matching_pairings(l, sums)
    if not candidates:
        raise CaseResolutionError(f"no pairing of {l} realises the opposite sums {list(sums)}")
    if len(candidates) == 1:
        return OppositePairing.from_pairs(candidates[0], "unique")
    comb1 = OppositePairing.from_pairs([(l[0], l[4]), (l[2], l[3]), (l[1], l[5])], "COMB1")
    comb2 = OppositePairing.from_pairs([(l[1], l[3]), (l[0], l[5]), (l[2], l[4])], "COMB2")
    v, w, u = l[1] - l[0], l[2] - l[1], l[3] - l[2]
    pattern1 = v == l[4] - l[3] and w == l[5] - l[4] and v > 0 and w > 0
    if pattern1 and {comb1.pairs, comb2.pairs} == set(candidates):
        base = l[0] + l[1] + l[2]
        if u > 0:
            later = [e for e, c in _positive_terms(g) if e > base]
            if not later:
                raise CaseResolutionError("g has no exponent beyond the smallest triple")
            return comb1 if later[0] == 2 * l[0] + l[4] else comb2
        return comb1 if g.coefficient(base) == 0 else comb2
    # remaining ambiguous case: forward-compute g for every candidate configuration
    matches = []
    for pairs in candidates:
        for space in configurations(pairs):
            trial = g_series(space, _cutoff_for(space, g.exact_below))
            if _agree_below(trial, g):
                matches.append(pairs)
                break
    if not matches:
        raise CaseResolutionError("no candidate pairing reproduces g")
    return OppositePairing.from_pairs(matches[0], "case2-bruteforce", alternatives=matches[1:])


def _cutoff_for(space, exact_below):
    K = 3
    while (K + 1) * space.min_edge() < exact_below:
        K += 1
    return K


def n4_resolve_swap(pairing: OppositePairing, m1: Fraction) -> FiniteMetricSpace:
    """Pick the configuration of the pairing whose exact ``M_1`` equals ``m1``."""
    first, second = configurations(pairing.pairs)
    d = first.d
    dd = 2 * (d[0][1] - d[2][3]) * (d[0][2] - d[1][3]) * (d[0][3] - d[1][2])
    if dd == 0:
        return first
    hits = [s for s in (first, second) if m1_n4_closed(s) == m1]
    if len(hits) != 1:
        raise MismatchError(f"M1 = {m1} matches {len(hits)} of the two swap candidates")
    return hits[0]


# --- top level --------------------------------------------------------------------------


def series_from_extraction(result: ExtractionResult, max_denominator: int = 10 ** 6) -> GeneralizedSeries:
    """Round extracted exponents to rationals and coefficients to integers."""
    terms = []
    for alpha, a in result.pairs:
        terms.append((Fraction(str(mpmath.nstr(alpha, 30))).limit_denominator(max_denominator),
                      Fraction(int(mpmath.nint(a)))))
    last = max(e for e, _ in terms)
    threshold = last + Fraction(1, max_denominator)
    return GeneralizedSeries(tuple(terms), threshold)


def _generic_route(series, n, route, cert):
    N = math.comb(n, 2)
    if route == "ri":
        edges = edges_from_series_ri(series, N)
        cert.case_path.append("edges: successive monoid generators")
    else:
        edges = edges_from_series_svti(series, N)
        cert.case_path.append("edges: N smallest exponents")
        cert.check("svti", True)
    lengths = list(edges.lengths)
    depth = 1
    while depth < MAX_GENERIC_DEPTH and (depth + 1) * lengths[0] < series.exact_below:
        depth += 1
    if n == 3:
        cert.check("three edges determine the triangle", True)
        data = triple_sums_from_series(series, edges)
        return assemble_from_triples(data.triangle_triples, data.open3path_triples)
    required = 5 if route == "svti_generic" else 3
    generic = lengths_p_generic(lengths, min(max(depth, required), MAX_GENERIC_DEPTH))
    cert.check(f"p-generic at depth {max(depth, required)}", generic)
    if route == "svti_generic" and not lengths_p_generic(lengths, 5):
        raise ReconstructionError("hypothesis failed: recovered lengths are not 5-generic")
    if not lengths_p_generic(lengths, 3):
        raise ReconstructionError("hypothesis failed: recovered lengths are not 3-generic")
    data = triple_sums_from_series(series, edges)
    cert.case_path.append("triangle / open 3-path split")
    return assemble_from_triples(data.triangle_triples, data.open3path_triples)


def _n4_exhaustive(series, edges, m1):
    """Every labelling of the six lengths, kept if it reproduces the series and ``M_1``."""
    seen, hits = set(), []
    pairs = list(itertools.combinations(range(4), 2))
    for perm in set(itertools.permutations(edges.lengths)):
        space = FiniteMetricSpace.from_edges(4, dict(zip(pairs, perm)))
        key = canonical_form(space)
        if key in seen:
            continue
        seen.add(key)
        if m1_n4_closed(space) == m1 and _agree_below(_series_like(space, series.exact_below), series):
            hits.append(space)
    return hits


def _n4_route(series, m1, cert):
    edges = edges_from_series_svti(series, 6)
    cert.check("svti", True)
    cert.case_path.append("edges: 6 smallest exponents")
    if m1 is None:
        raise ReconstructionError("the four-point route needs the exact M1")
    try:
        return _n4_steps(series, edges, Fraction(m1), cert)
    except (CaseResolutionError, MismatchError) as exc:
        log.warning("four-point case analysis failed (%s); searching all labellings", exc)
        cert.check("case analysis", False, exc)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        hits = _n4_exhaustive(series, edges, Fraction(m1))
    if not hits:
        raise MismatchError("no labelling of the recovered edges matches the series and M1")
    if len(hits) > 1:
        raise AmbiguityError(f"{len(hits)} non-isometric labellings fit the truncated data")
    cert.case_path.append("fallback: exhaustive labelling search")
    return hits[0]


def _n4_steps(series, edges, m1, cert):
    f = f_from_series(series, edges.lengths)
    sums, case = n4_opposite_sums(f, edges)
    cert.case_path.append(f"opposite sums: {case}")
    g = g_from_f(f, sums)
    pairing = n4_opposite_combination(g, edges, sums)
    cert.case_path.append(f"pairing: {pairing.comb_choice}")
    first, _ = configurations(pairing.pairs)
    d = first.d
    vanished = (d[0][1] - d[2][3]) * (d[0][2] - d[1][3]) * (d[0][3] - d[1][2]) == 0
    cert.check("swap difference vanishes", vanished)
    candidates = [pairing.pairs] + list(pairing.alternatives)
    solutions = []
    for pairs in candidates:
        try:
            space = n4_resolve_swap(OppositePairing.from_pairs(pairs, pairing.comb_choice), m1)
        except MismatchError:
            continue
        if _agree_below(_series_like(space, series.exact_below), series):
            solutions.append(space)
    if not solutions:
        raise MismatchError("no configuration matches both the series and M1")
    if any(are_isometric(solutions[0], s) is None for s in solutions[1:]):
        raise AmbiguityError("several non-isometric configurations fit the truncated data")
    cert.case_path.append("swap is an isometry" if vanished else "swap resolved by M1")
    return solutions[0]


def reconstruct(data, n: int, mode: str = "auto", m1=None, extraction_options=None) -> ReconstructionResult:
    """Dispatch to the route matching ``mode`` and certify the result.

    ``data`` is :class:`AsymptoticDerivatives` (three points), a :class:`GeneralizedSeries`,
    or a :class:`SampleGrid` (exponents extracted numerically, then rounded).
    """
    cert = Certificate()
    if isinstance(data, AsymptoticDerivatives):
        if n != 3 or mode not in ("auto", "n3"):
            raise ReconstructionError("derivative limits only determine three-point spaces")
        cert.applied = "three-point"
        cert.case_path.append("derivative limits -> s1, s2, s3 -> side cubic")
        space = reconstruct_n3(data)
        cert.check("valid metric", validate(space).ok)
        return ReconstructionResult(space, cert)

    if isinstance(data, SampleGrid):
        extracted = extract_series_from_samples(
            sampler_from_grid(data), **({"max_terms": 12, "t_schedule": data.ts()} | (extraction_options or {}))
        )
        data = series_from_extraction(extracted)
        cert.case_path.append(f"numeric extraction of {len(extracted.pairs)} terms")
        cert.check("exponents rounded from numeric samples", True)
    if not isinstance(data, GeneralizedSeries):
        raise TypeError(f"unsupported input {type(data).__name__}")
    series = data
    constant = series.coefficient(0)
    cert.check("constant term equals point count", constant == n, constant)
    if constant != n:
        raise InconsistencyError(f"constant term {constant} differs from n = {n}")

    if n == 2:
        e, c = _positive_terms(series)[0]
        if c != -2:
            raise InconsistencyError(f"two-point series must start with -2 q^d, got {c}")
        cert.applied = "two-point"
        space = FiniteMetricSpace.from_edges(2, {(0, 1): e})
        return ReconstructionResult(space, cert)

    side = detect_complete_graph(series, n)
    if side is not None and mode == "auto":
        cert.applied = "complete-graph"
        cert.case_path.append("shortest length has full multiplicity")
        space = FiniteMetricSpace.from_edges(n, {p: side for p in itertools.combinations(range(n), 2)})
        return ReconstructionResult(space, _finish(space, series, cert))

    if mode == "n3":
        raise ReconstructionError("the three-point route needs derivative limits, not a series")
    if mode == "auto":
        if n == 4:
            try:
                edges_from_series_svti(series, 6)
                routes = ["n4_svti"]
            except ReconstructionError:
                routes = ["ri", "svti_generic"]
        else:
            routes = ["ri", "svti_generic"]
    else:
        routes = [mode]
    failures = []
    for route in routes:
        attempt = Certificate(cert.applied, list(cert.checks), list(cert.case_path))
        try:
            if route == "n4_svti":
                if n != 4:
                    raise ReconstructionError("the four-point route needs n = 4")
                attempt.applied = "four-point-svti"
                space = _n4_route(series, m1, attempt)
            elif route in ("ri", "svti_generic"):
                attempt.applied = "rationally-independent" if route == "ri" else "svti+g5"
                space = _generic_route(series, n, route, attempt)
            else:
                raise ValueError(f"unknown mode {route!r}")
            return ReconstructionResult(space, _finish(space, series, attempt))
        except ReconstructionError as exc:
            log.info("route %s failed: %s", route, exc)
            failures.append(f"{route}: {exc}")
    raise ReconstructionError("; ".join(failures))


def _finish(space, series, cert):
    cert.check("valid metric", validate(space).ok)
    agree = _agree_below(_series_like(space, series.exact_below), series)
    cert.check(f"forward series matches below {series.exact_below}", agree)
    if not agree:
        raise MismatchError("reconstructed space does not reproduce the input series")
    return cert
