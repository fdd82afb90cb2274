"""Exact small-scale (t -> 0+) asymptotics of the magnitude function.

Writing ``M(t) = Mu(t) / Md(t)`` with ``Mu`` the cofactor sum and ``Md`` the determinant of
``Z(t)``, both series start at ``t^(n-1)``; the derivative limits ``M_k = M^(k)(0+)``
follow from exact division of the shifted series.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateError, InconsistencyError, WrongSizeError
from .fixtures import k32_space
from .metric import FiniteMetricSpace, enumerate_index_sets, satisfies_svti, to_fraction
from .series import TaylorSeries, taylor_exp_neg, taylor_matrix_det_and_cofactor_sum


@dataclass(frozen=True)
class TaylorCoefficients:
    nu: tuple
    delta: tuple
    order: int
    n: int

    def mu_series(self) -> TaylorSeries:
        return TaylorSeries(self.nu)

    def md_series(self) -> TaylorSeries:
        return TaylorSeries(self.delta)


@dataclass(frozen=True)
class AsymptoticDerivatives:
    M1: Fraction
    M2: Fraction
    M3: Fraction


def default_order(n: int) -> int:
    return n + 3


def compute_nu_delta(space: FiniteMetricSpace, order: int = None) -> TaylorCoefficients:
    """Taylor coefficients of the cofactor sum (nu) and determinant (delta) of ``Z(t)``."""
    K = default_order(space.n) if order is None else order
    z = [[taylor_exp_neg(x, K) for x in row] for row in space.d]
    det, cof = taylor_matrix_det_and_cofactor_sum(z)
    return TaylorCoefficients(cof.coeffs, det.coeffs, K, space.n)


def _require(space, n):
    if space.n != n:
        raise WrongSizeError(f"formula needs an {n}-point space, got {space.n}")


def delta2_closed(space: FiniteMetricSpace) -> Fraction:
    _require(space, 3)
    d = space.d
    total = Fraction(0)
    for i, j, k in itertools.permutations(range(3)):
        total += (d[j][k] + d[i][k] - d[i][j]) * (d[i][k] + d[i][j] - d[j][k])
    return total / 2


def delta3_closed(space: FiniteMetricSpace) -> Fraction:
    _require(space, 4)
    d = space.d
    total = Fraction(0)
    for i, j, k, l in itertools.permutations(range(4)):
        total += (
            (d[i][k] + d[j][k] - d[i][j])
            * (d[i][l] + d[k][l] - d[i][k])
            * (d[i][j] + d[j][l] - d[i][l])
        )
    return total / 6


def delta3_polynomial(space: FiniteMetricSpace) -> Fraction:
    """The expanded form: opposite pairs, triangles and simple open 3-paths."""
    _require(space, 4)
    d = space.d
    opp = sum(d[i][j] ** 2 * d[k][l] + d[i][j] * d[k][l] ** 2
              for i, j, k, l in enumerate_index_sets(4, "opposite_pairs"))
    tri = sum(d[i][j] * d[j][k] * d[i][k] for i, j, k in enumerate_index_sets(4, "triangles"))
    paths = sum(d[i][j] * d[j][k] * d[k][l]
                for i, j, k, l in enumerate_index_sets(4, "simple_open3paths"))
    return Fraction(-2 * opp - 2 * tri + 2 * paths)


def derivative_limits(space: FiniteMetricSpace, coeffs: TaylorCoefficients = None) -> AsymptoticDerivatives:
    """``M_1, M_2, M_3`` as exact rationals via truncated division ``Mu / Md``."""
    n = space.n
    if coeffs is None:
        coeffs = compute_nu_delta(space)
    if coeffs.order < n + 2:
        raise ValueError(f"need Taylor order >= {n + 2} for three derivatives")
    if coeffs.delta[n - 1] == 0:
        raise DegenerateError("delta_{n-1} vanishes; derivative limits undefined")
    u = coeffs.mu_series().shifted_down(n - 1)
    v = coeffs.md_series().shifted_down(n - 1)
    ratio = u / v
    return AsymptoticDerivatives(*(math.factorial(k) * ratio[k] for k in (1, 2, 3)))


def m1_general(coeffs: TaylorCoefficients) -> Fraction:
    """``M_1 = (nu_n - delta_n) / delta_{n-1}``."""
    n = coeffs.n
    if coeffs.delta[n - 1] == 0:
        raise DegenerateError("delta_{n-1} vanishes")
    return (coeffs.nu[n] - coeffs.delta[n]) / coeffs.delta[n - 1]


def n3_closed_derivatives(a, b, c) -> AsymptoticDerivatives:
    """Closed forms for a triangle: M1, M2 directly in the sides, M3 through x, y, z.

    ``x = b + c - a`` etc. with elementary symmetric functions ``s1, s2, s3``.
    """
    a, b, c = map(to_fraction, (a, b, c))
    den = -a * a - b * b - c * c + 2 * a * b + 2 * b * c + 2 * c * a
    if den == 0:
        raise DegenerateError("delta_2 vanishes")
    m1 = 2 * a * b * c / den
    m2 = 2 * a * b * c * (b + c - a) * (c + a - b) * (a + b - c) / den ** 2
    s1, s2, s3 = n3_invariants(a, b, c)
    m3 = -(s1 * s2 - s3) * (s1 ** 2 * s2 ** 2 + 4 * s1 * s2 * s3 - 3 * s2 ** 3 - 12 * s3 ** 2) / (32 * s2 ** 3)
    return AsymptoticDerivatives(m1, m2, m3)


def n3_invariants(a, b, c) -> tuple:
    x, y, z = b + c - a, c + a - b, a + b - c
    return x + y + z, x * y + y * z + z * x, x * y * z


def m1_n4_closed(space: FiniteMetricSpace) -> Fraction:
    """``M_1`` of a 4-point space from the displayed numerator over ``delta_3``."""
    _require(space, 4)
    if not satisfies_svti(space):
        warnings.warn("strict virtual triangle inequality fails; denominator sign not guaranteed")
    d = space.d
    d12, d13, d14, d23, d24, d34 = d[0][1], d[0][2], d[0][3], d[1][2], d[1][3], d[2][3]
    num = (
        -(d12 * d34) ** 2 - (d13 * d24) ** 2 - (d14 * d23) ** 2
        + 2 * d13 * d14 * d23 * d24 + 2 * d12 * d14 * d23 * d34 + 2 * d12 * d13 * d24 * d34
    )
    den = delta3_polynomial(space)
    if den == 0:
        raise DegenerateError("delta_3 vanishes")
    return num / den


def swap_d14_d23(space: FiniteMetricSpace) -> FiniteMetricSpace:
    """Exchange the lengths of edges ``P1P4`` and ``P2P3`` (0-based ``(0,3)`` and ``(1,2)``)."""
    _require(space, 4)
    d = [list(row) for row in space.d]
    d[0][3], d[1][2] = space.d[1][2], space.d[0][3]
    d[3][0], d[2][1] = d[0][3], d[1][2]
    return FiniteMetricSpace(d, space.labels)


def delta3_swap_difference(space: FiniteMetricSpace) -> Fraction:
    """``delta_3(X) - delta_3(X with d14, d23 exchanged)``, checked against the product form."""
    _require(space, 4)
    direct = compute_nu_delta(space, 3).delta[3] - compute_nu_delta(swap_d14_d23(space), 3).delta[3]
    d = space.d
    product = 2 * (d[0][1] - d[2][3]) * (d[0][2] - d[1][3]) * (d[0][3] - d[1][2])
    if direct != product:
        raise InconsistencyError(f"swap difference mismatch: {direct} != {product}")
    return direct


def delta4_k32_formula(ell) -> Fraction:
    ell = to_fraction(ell)
    return -4 * ell * (3 * ell - 4)


def delta4_k32(ell) -> Fraction:
    """``delta_4`` of ``K_{3,2}`` plus an edge of length ``ell``, checked against ``-4 ell (3 ell - 4)``."""
    ell = to_fraction(ell)
    if not 0 < ell <= 2:
        raise ValueError("ell must lie in (0, 2]")
    value = compute_nu_delta(k32_space(ell), 4).delta[4]
    expected = delta4_k32_formula(ell)
    if value != expected:
        raise InconsistencyError(f"delta_4 = {value} but the closed form gives {expected}")
    return value


def nu_delta_tsv(coeffs: TaylorCoefficients) -> str:
    lines = ["k\tnu\tdelta"]
    lines += [f"{k}\t{nu}\t{de}" for k, (nu, de) in enumerate(zip(coeffs.nu, coeffs.delta))]
    return "\n".join(lines) + "\n"
