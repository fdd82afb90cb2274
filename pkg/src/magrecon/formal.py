"""Formal magnitude ``m_X(q)`` as a truncated generalized series, and the derived series
used by the four-point reconstruction.

The path expansion sums ``(-1)^k q^(length)`` over all walks of ``k`` steps whose
consecutive points differ.  Truncating at ``k <= K`` keeps every exponent below
``(K + 1) * min_edge`` exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from .errors import CapacityError, ConvergenceError
from .metric import FiniteMetricSpace, enumerate_index_sets
from .series import INF, GeneralizedSeries, _mp_power

MAX_PATHS = 10 ** 8


@dataclass(frozen=True)
class PathExpansion:
    series: GeneralizedSeries
    d_index_cutoff: int
    per_d_index: dict = field(default_factory=dict)
    n: int = 0

    distances: tuple = ()

    def exact_part(self, max_d_index: int) -> GeneralizedSeries:
        """Exact (untruncated) sum of the walk contributions with at most ``max_d_index`` steps."""
        total = GeneralizedSeries()
        for k in range(min(max_d_index, self.d_index_cutoff) + 1):
            total = total + self.per_d_index[k]
        return total

    def tail_bound(self, q):
        """Rigorous bound on ``|M - series(q)|``.

        Two pieces: the walks of at most ``K`` steps whose length reached the threshold
        (summed exactly in absolute value), and the Neumann tail ``n rho^(K+1) / (1 - rho)``
        with ``rho`` the largest row sum of ``Z - I``.  Infinite when ``rho >= 1``.
        """
        q = mpmath.mpf(q)
        T = self.series.exact_below
        dropped = mpmath.fsum(
            abs(c) * _mp_power(q, e)
            for k in range(1, self.d_index_cutoff + 1)
            for e, c in self.per_d_index[k].terms
            if e >= T
        )
        rho = max(
            mpmath.fsum(_mp_power(q, x) for j, x in enumerate(row) if j != i)
            for i, row in enumerate(self.distances)
        )
        if rho >= 1:
            return mpmath.inf
        return dropped + self.n * rho ** (self.d_index_cutoff + 1) / (1 - rho)

    def tail_budget(self, q):
        """``tail_bound(q) / q**exact_below``: the budget to hand to :func:`gseries_eval`."""
        return self.tail_bound(q) / _mp_power(mpmath.mpf(q), self.series.exact_below)


def path_expansion(space: FiniteMetricSpace, K: int) -> PathExpansion:
    """Walk expansion up to ``K`` steps.

    Walks are counted by a transfer recursion over end points (equivalent to depth-first
    enumeration of the index sets, but linear in the number of distinct exponents).
    """
    n = space.n
    if K < 0:
        raise ValueError("cutoff must be non-negative")
    if n * (n - 1) ** K > MAX_PATHS:
        raise CapacityError(f"{n * (n - 1) ** K} walks exceed the cap of {MAX_PATHS}")
    d = space.d
    ends = [{Fraction(0): 1} for _ in range(n)]
    per = {0: GeneralizedSeries(((Fraction(0), Fraction(n)),))}
    for k in range(1, K + 1):
        nxt = []
        for j in range(n):
            acc = {}
            for i in range(n):
                if i == j:
                    continue
                dij = d[i][j]
                for e, c in ends[i].items():
                    key = e + dij
                    acc[key] = acc.get(key, 0) + c
            nxt.append(acc)
        ends = nxt
        merged = {}
        for acc in ends:
            for e, c in acc.items():
                merged[e] = merged.get(e, 0) + c
        sign = -1 if k % 2 else 1
        per[k] = GeneralizedSeries.from_dict({e: sign * c for e, c in merged.items()})
    threshold = (K + 1) * space.min_edge()
    total = {}
    for part in per.values():
        for e, c in part.terms:
            if e < threshold:
                total[e] = total.get(e, 0) + c
    return PathExpansion(GeneralizedSeries.from_dict(total, threshold), K, per, n, space.d)


def path_expansion_bruteforce(space: FiniteMetricSpace, K: int) -> GeneralizedSeries:
    """Reference implementation by explicit enumeration of every walk (small inputs only)."""
    threshold = (K + 1) * space.min_edge()
    total = {}
    for k in range(K + 1):
        for walk in enumerate_index_sets(space.n, "kstep_paths", k):
            e = sum((space.d[a][b] for a, b in zip(walk, walk[1:])), Fraction(0))
            total[e] = total.get(e, 0) + (-1) ** k
    return GeneralizedSeries.from_dict(total, threshold)


def _monomials(exponents, coeff) -> GeneralizedSeries:
    out = {}
    for e in exponents:
        out[e] = out.get(e, 0) + coeff
    return GeneralizedSeries.from_dict(out)


@dataclass(frozen=True)
class M3Parts:
    constant: GeneralizedSeries
    single: GeneralizedSeries
    double: GeneralizedSeries
    open2path: GeneralizedSeries
    triangle: GeneralizedSeries
    open3path: GeneralizedSeries

    def total(self) -> GeneralizedSeries:
        return self.constant + self.single + self.double + self.open2path + self.triangle + self.open3path


def m3_parts(space: FiniteMetricSpace) -> M3Parts:
    """The d-index <= 3 part of ``m_X`` split into constant, edge, doubled-edge, open
    2-path, triangle and open 3-path groups (coefficients n, -2, 2, 2, -6, -2)."""
    n, d = space.n, space.d
    if n < 3:
        raise ValueError("m3_parts needs at least three points")
    edges = [x for _, x in space.edges()]
    return M3Parts(
        constant=GeneralizedSeries(((Fraction(0), Fraction(n)),)),
        single=_monomials(edges, -2),
        double=_monomials([2 * x for x in edges], 2),
        open2path=_monomials(
            [d[i][j] + d[j][k] for i, j, k in enumerate_index_sets(n, "open2paths")], 2
        ),
        triangle=_monomials(
            [d[i][j] + d[j][k] + d[k][i] for i, j, k in enumerate_index_sets(n, "triangles")], -6
        ),
        open3path=_monomials(
            [d[i][j] + d[j][k] + d[k][l] for i, j, k, l in enumerate_index_sets(n, "open3paths")], -2
        ),
    )


def sigma_from_lengths(lengths: Sequence, p: int) -> GeneralizedSeries:
    return _monomials([p * x for x in lengths], 1)


def sigma_series(space: FiniteMetricSpace, p: int) -> GeneralizedSeries:
    """``sum_{i<j} q^(p d_ij)``."""
    return sigma_from_lengths([x for _, x in space.edges()], p)


def f_from_series(m: GeneralizedSeries, lengths: Sequence) -> GeneralizedSeries:
    """Strip the edge-only terms: ``m - 4 + 2 s1 - s1^2 - s2 + s1 s2 + s1^3/3 + 2 s3/3``."""
    s1, s2, s3 = (sigma_from_lengths(lengths, p) for p in (1, 2, 3))
    four = GeneralizedSeries(((Fraction(0), Fraction(4)),))
    return (
        m - four + s1.scale(2) - s1 * s1 - s2 + s1 * s2
        + (s1 * s1 * s1).scale(Fraction(1, 3)) + s3.scale(Fraction(2, 3))
    )


def f_series(space: FiniteMetricSpace, K: int = 3) -> GeneralizedSeries:
    return f_from_series(path_expansion(space, K).series, [x for _, x in space.edges()])


def f_exact_low(space: FiniteMetricSpace) -> GeneralizedSeries:
    """The exact d-index <= 3 part of ``f``, computed from the walk expansion."""
    return f_from_series(path_expansion(space, 3).exact_part(3), [x for _, x in space.edges()])


def f3_part(space: FiniteMetricSpace) -> GeneralizedSeries:
    """The d-index <= 3 part of ``f`` from its closed form: opposite pairs (-2), triangles
    (-4), vertex stars (+2) and ``2 d_ij + d_kl`` opposite terms (+2)."""
    if space.n != 4:
        raise ValueError("f3_part is defined for four points")
    d = space.d
    opp = enumerate_index_sets(4, "opposite_pairs")
    return (
        _monomials([d[i][j] + d[k][l] for i, j, k, l in opp], -2)
        + _monomials([d[i][j] + d[j][k] + d[k][i] for i, j, k in enumerate_index_sets(4, "triangles")], -4)
        + _monomials([d[i][j] + d[i][k] + d[i][l] for i, j, k, l in enumerate_index_sets(4, "vertex_stars")], 2)
        + _monomials([2 * d[i][j] + d[k][l] for i, j, k, l in opp] + [d[i][j] + 2 * d[k][l] for i, j, k, l in opp], 2)
    )


def opposite_sums(space: FiniteMetricSpace) -> list:
    d = space.d
    return sorted(d[i][j] + d[k][l] for i, j, k, l in enumerate_index_sets(4, "opposite_pairs"))


def g_from_f(f: GeneralizedSeries, opp_sums: Sequence) -> GeneralizedSeries:
    """``g = f + 2 sum q^(opposite-pair sum)``."""
    return f + _monomials(list(opp_sums), 2)


def g_series(space: FiniteMetricSpace, K: int = 3) -> GeneralizedSeries:
    return g_from_f(f_series(space, K), opposite_sums(space))


# --- numeric extraction ---------------------------------------------------------------


@dataclass(frozen=True)
class ExtractionResult:
    pairs: tuple
    residual: float

    def alphas(self):
        return [a for a, _ in self.pairs]


def geometric_schedule(t_min=1.0, t_max=200.0, ratio=1.15) -> list:
    count = int(math.floor(math.log(t_max / t_min) / math.log(ratio))) + 1
    return [t_min * ratio ** k for k in range(count)]


def _slope(ts, ys):
    """Least-squares slope of ``ys`` against ``ts``."""
    m = len(ts)
    tbar = mpmath.fsum(ts) / m
    ybar = mpmath.fsum(ys) / m
    num = mpmath.fsum((t - tbar) * (y - ybar) for t, y in zip(ts, ys))
    den = mpmath.fsum((t - tbar) ** 2 for t in ts)
    return num / den


def extract_series_from_samples(
    sampler: Callable,
    max_terms: int,
    t_schedule: Optional[Sequence] = None,
    tol: float = 1e-40,
    window: int = 8,
    slope_tol: float = 1e-8,
    dps: Optional[int] = None,
    snap_constant: bool = True,
) -> ExtractionResult:
    """Peel ``(alpha_m, a_m)`` off ``M(t) ~ sum a_m exp(-alpha_m t)`` from large-``t`` samples.

    For each term the residual ``M - sum_{i<m} a_i exp(-alpha_i t)`` is fitted on windows of
    ``window`` consecutive schedule points: ``alpha_m`` is the least-squares slope of
    ``-log|residual|`` and ``a_m`` the window mean of ``exp(alpha_m t) * residual``.  The
    window used is the largest-``t`` one whose slope agrees with its left neighbour within
    ``slope_tol`` and exceeds the previous exponent; later windows are dominated by the
    estimation error of earlier terms.  The constant term is the point count, so with
    ``snap_constant`` a near-integer ``a_0`` is rounded.
    """
    ts_float = list(geometric_schedule() if t_schedule is None else t_schedule)
    if any(b <= a for a, b in zip(ts_float, ts_float[1:])):
        raise ValueError("schedule must be increasing")
    if len(ts_float) < window + 1:
        raise ValueError("schedule shorter than one window plus one point")
    if dps is None:
        dps = int(ts_float[-1] * 1.5) + 40
    with mpmath.workdps(dps):
        ts = [mpmath.mpf(t) for t in ts_float]
        values = [mpmath.mpf(sampler(t)) for t in ts]
        scale = max(abs(v) for v in values) or mpmath.mpf(1)
        floor = scale * mpmath.mpf(10) ** (-(dps - 10))
        pairs = []

        tail = values[-window:]
        a0 = mpmath.fsum(tail) / window
        if snap_constant and abs(a0 - mpmath.nint(a0)) < mpmath.mpf("1e-6"):
            a0 = mpmath.nint(a0)
        pairs.append((mpmath.mpf(0), a0))
        residual = [v - a0 for v in values]

        while len(pairs) < max_terms:
            if max(abs(r) for r in residual) < tol:
                break
            prev_alpha = pairs[-1][0]
            slopes = {}
            for j in range(len(ts) - window + 1):
                seg = residual[j:j + window]
                if any(abs(r) <= floor for r in seg):
                    continue
                if len({mpmath.sign(r) for r in seg}) != 1:
                    continue
                slopes[j] = -_slope(ts[j:j + window], [mpmath.log(abs(r)) for r in seg])
            chosen = None
            for j in sorted(slopes, reverse=True):
                if j - 1 not in slopes:
                    continue
                s = slopes[j]
                if s > prev_alpha + mpmath.mpf("1e-3") and abs(s - slopes[j - 1]) <= slope_tol * max(1, abs(s)):
                    chosen = j
                    break
            if chosen is None:
                if not slopes:
                    break
                raise ConvergenceError(
                    f"no stable window for term {len(pairs)}; slope estimates disagree beyond {slope_tol}"
                )
            alpha = slopes[chosen]
            seg_t = ts[chosen:chosen + window]
            seg_r = residual[chosen:chosen + window]
            coeff = mpmath.fsum(mpmath.exp(t * alpha) * r for t, r in zip(seg_t, seg_r)) / window
            pairs.append((alpha, coeff))
            residual = [r - coeff * mpmath.exp(-alpha * t) for r, t in zip(residual, ts)]
        final = float(abs(residual[-1]))
        return ExtractionResult(tuple((+a, +c) for a, c in pairs), final)


def extraction_tsv(result: ExtractionResult) -> str:
    lines = ["alpha\ta\tresidual"]
    for alpha, a in result.pairs:
        lines.append(f"{mpmath.nstr(alpha, 20)}\t{mpmath.nstr(a, 20)}\t{result.residual:.3e}")
    return "\n".join(lines) + "\n"


def sampler_from_grid(grid) -> Callable:
    table = {s.t: s.value for s in grid.usable()}

    def sampler(t):
        return table[float(t)]

    return sampler
