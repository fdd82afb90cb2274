"""Exact truncated series.

``TaylorSeries`` holds ``c_0 + c_1 t + ... + c_K t^K + O(t^(K+1))`` and is used for the
small-scale expansion of the similarity matrix.  ``GeneralizedSeries`` holds finitely many
terms ``c q^e`` with rational exponents, complete below a threshold ``exact_below``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import DegenerateError, ParseError
from .metric import to_fraction

INF = math.inf


@dataclass(frozen=True)
class TaylorSeries:
    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a TaylorSeries needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(to_fraction(c) for c in self.coeffs))

    @classmethod
    def constant(cls, value, order: int) -> "TaylorSeries":
        return cls((to_fraction(value),) + (Fraction(0),) * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def _check(self, other):
        if other.order != self.order:
            raise ValueError(f"truncation orders differ ({self.order} vs {other.order})")

    def __add__(self, other):
        self._check(other)
        return TaylorSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return TaylorSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return TaylorSeries(tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if not isinstance(other, TaylorSeries):
            c = to_fraction(other)
            return TaylorSeries(tuple(a * c for a in self.coeffs))
        self._check(other)
        K = self.order
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (K + 1)
        for i, ai in enumerate(a):
            if ai:
                for j in range(K + 1 - i):
                    out[i + j] += ai * b[j]
        return TaylorSeries(tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TaylorSeries):
            return self * (1 / to_fraction(other))
        self._check(other)
        if other.coeffs[0] == 0:
            raise DegenerateError("series division needs a nonzero constant term")
        b0 = other.coeffs[0]
        out = []
        for k in range(self.order + 1):
            acc = self.coeffs[k] - sum(out[j] * other.coeffs[k - j] for j in range(k))
            out.append(acc / b0)
        return TaylorSeries(tuple(out))

    def shifted_down(self, s: int) -> "TaylorSeries":
        """Divide by ``t^s`` assuming the first ``s`` coefficients vanish; order drops by ``s``."""
        if any(self.coeffs[:s]):
            raise DegenerateError(f"leading {s} coefficients are not all zero")
        return TaylorSeries(self.coeffs[s:])


def taylor_exp_neg(d, order: int) -> TaylorSeries:
    """Coefficients of ``exp(-d t)`` up to ``t^order``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    d = to_fraction(d)
    coeffs = [Fraction(1)]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * (-d) / k)
    return TaylorSeries(tuple(coeffs))


def taylor_det(m: Sequence[Sequence[TaylorSeries]]) -> TaylorSeries:
    """Determinant by Laplace expansion memoised over used-column subsets.

    Division free, so it stays exact even though every pivot of a similarity matrix
    vanishes at ``t = 0``.  Cost is ``O(n 2^n)`` series products.
    """
    n = len(m)
    order = m[0][0].order
    zero = TaylorSeries.constant(0, order)
    partial = {0: TaylorSeries.constant(1, order)}
    for row in range(n):
        nxt = {}
        for mask, acc in partial.items():
            for col in range(n):
                bit = 1 << col
                if mask & bit:
                    continue
                term = acc * m[row][col]
                # sign flips once per already-used column to the right of ``col``
                if bin(mask >> (col + 1)).count("1") % 2:
                    term = -term
                key = mask | bit
                nxt[key] = nxt.get(key, zero) + term
        partial = nxt
    return partial[(1 << n) - 1]


def taylor_matrix_det_and_cofactor_sum(m):
    """Return ``(det m, sum of all cofactors of m)`` as truncated series.

    The cofactor sum is ``det(m + J) - det(m)`` with ``J`` the all-ones matrix
    (matrix determinant lemma for the rank-one update ``1 1^T``).
    """
    order = m[0][0].order
    one = TaylorSeries.constant(1, order)
    det = taylor_det(m)
    bumped = [[entry + one for entry in row] for row in m]
    return det, taylor_det(bumped) - det


@dataclass(frozen=True)
class GeneralizedSeries:
    """Sum of ``coefficient * q**exponent`` terms, exact for exponents below ``exact_below``."""

    terms: tuple = ()
    exact_below: object = INF

    def __post_init__(self):
        threshold = self.exact_below
        if threshold != INF:
            threshold = to_fraction(threshold)
            object.__setattr__(self, "exact_below", threshold)
        merged = {}
        for e, c in self.terms:
            e, c = to_fraction(e), to_fraction(c)
            merged[e] = merged.get(e, Fraction(0)) + c
        clean = tuple(sorted((e, c) for e, c in merged.items() if c != 0 and e < threshold))
        if any(e < 0 for e, _ in clean):
            raise ValueError("exponents must be non-negative")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_dict(cls, coeffs: dict, exact_below=INF) -> "GeneralizedSeries":
        return cls(tuple(coeffs.items()), exact_below)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def coefficient(self, exponent) -> Fraction:
        return self.as_dict().get(to_fraction(exponent), Fraction(0))

    def exponents(self) -> list:
        return [e for e, _ in self.terms]

    def min_exponent(self):
        return self.terms[0][0] if self.terms else self.exact_below

    def is_exact(self) -> bool:
        return self.exact_below == INF

    def truncated(self, below) -> "GeneralizedSeries":
        return GeneralizedSeries(self.terms, min(self.exact_below, to_fraction(below)))

    def positive_part(self) -> "GeneralizedSeries":
        return GeneralizedSeries(tuple((e, c) for e, c in self.terms if e > 0), self.exact_below)

    def __add__(self, other):
        return GeneralizedSeries(self.terms + other.terms, min(self.exact_below, other.exact_below))

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, factor) -> "GeneralizedSeries":
        factor = to_fraction(factor)
        return GeneralizedSeries(tuple((e, c * factor) for e, c in self.terms), self.exact_below)

    def __mul__(self, other):
        if not isinstance(other, GeneralizedSeries):
            return self.scale(other)
        threshold = min(
            self.exact_below + other.min_exponent(), other.exact_below + self.min_exponent()
        )
        out = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if e < threshold:
                    out[e] = out.get(e, Fraction(0)) + c1 * c2
        return GeneralizedSeries.from_dict(out, threshold)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = GeneralizedSeries(((Fraction(0), Fraction(1)),))
        for _ in range(k):
            result = result * self
        return result


def gseries_combine(a: GeneralizedSeries, b, op: str) -> GeneralizedSeries:
    """Exact ``add``/``sub``/``mul`` of two series, or ``scale`` of ``a`` by the rational ``b``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown op {op!r}")


def _mp_power(q, exponent: Fraction):
    return mpmath.power(q, mpmath.mpf(exponent.numerator) / exponent.denominator)


def gseries_eval(s: GeneralizedSeries, q, tail_budget=0):
    """Evaluate the stored terms at ``0 < q < 1``.

    Returns ``(value, error_bound)`` with ``error_bound = tail_budget * q**exact_below``
    (zero for an exact series).  Arithmetic is done in the ambient mpmath precision.
    """
    q = mpmath.mpf(q.numerator) / q.denominator if isinstance(q, Fraction) else mpmath.mpf(q)
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    value = mpmath.mpf(0)
    for e, c in s.terms:
        value += mpmath.mpf(c.numerator) / c.denominator * _mp_power(q, e)
    if s.exact_below == INF:
        return value, mpmath.mpf(0)
    return value, mpmath.mpf(tail_budget) * _mp_power(q, s.exact_below)


def format_rational(x) -> str:
    return "inf" if x == INF else str(x)


def dumps_series(s: GeneralizedSeries) -> str:
    lines = [f"# exact_below: {format_rational(s.exact_below)}"]
    lines += [f"{e}\t{c}" for e, c in s.terms]
    return "\n".join(lines) + "\n"


def loads_series(text: str) -> GeneralizedSeries:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# exact_below:"):
        raise ParseError("series file must start with '# exact_below: <value>'", line=1, column=1)
    raw = lines[0].split(":", 1)[1].strip()
    try:
        threshold = INF if raw == "inf" else Fraction(raw)
    except ValueError:
        raise ParseError(f"bad threshold {raw!r}", line=1, column=lines[0].index(":") + 2) from None
    terms = []
    last = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected '<exponent>\\t<coefficient>'", line=lineno, column=1)
        try:
            e = Fraction(parts[0])
        except ValueError:
            raise ParseError(f"bad exponent {parts[0]!r}", line=lineno, column=1) from None
        try:
            c = Fraction(parts[1])
        except ValueError:
            raise ParseError(f"bad coefficient {parts[1]!r}", line=lineno, column=len(parts[0]) + 2) from None
        if last is not None and e <= last:
            raise ParseError("exponents must be strictly increasing", line=lineno, column=1)
        last = e
        terms.append((e, c))
    return GeneralizedSeries(tuple(terms), threshold)
