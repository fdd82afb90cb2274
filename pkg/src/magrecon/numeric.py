"""Floating-point evaluation of the magnitude function ``M_X(t)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from .errors import SingularityError
from .metric import FiniteMetricSpace

DOUBLE_BITS = 53


@dataclass(frozen=True)
class MagnitudeSample:
    t: float
    value: object
    condition_estimate: float
    singular: bool = False

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("scale t must be positive")


@dataclass(frozen=True)
class SampleGrid:
    samples: tuple

    def __post_init__(self):
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample scales must be strictly increasing")

    def ts(self) -> list:
        return [s.t for s in self.samples]

    def usable(self) -> list:
        return [s for s in self.samples if not s.singular]


def _similarity_numpy(space, t):
    d = np.array([[float(x) for x in row] for row in space.d])
    return np.exp(-t * d)


def magnitude_mp(space: FiniteMetricSpace, t, precision: int):
    """``(M(t), inf-norm condition number)`` in mpmath at ``precision`` bits.

    No sign restriction on ``t``: the similarity matrix is analytic in ``t``, which the
    finite-difference oracles rely on.
    """
    with mpmath.workprec(precision):
        t = mpmath.mpf(t)
        n = space.n
        z = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                dij = space.d[i][j]
                z[i, j] = mpmath.exp(-t * mpmath.mpf(dij.numerator) / dij.denominator)
        try:
            w = mpmath.lu_solve(z, mpmath.ones(n, 1))
            cond = mpmath.norm(z, mpmath.inf) * mpmath.norm(mpmath.inverse(z), mpmath.inf)
        except ZeroDivisionError:
            raise SingularityError(f"similarity matrix singular at t={t}") from None
        value = mpmath.fsum(w[i] for i in range(n))
        return +value, +cond


def magnitude_at(space: FiniteMetricSpace, t, precision: int = DOUBLE_BITS) -> MagnitudeSample:
    """Solve ``Z(t) w = 1`` and return ``sum(w)`` with a condition estimate.

    Doubles go through LAPACK; any other ``precision`` (bits) uses mpmath LU.
    Raises :class:`SingularityError` when fewer than about four bits survive.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if precision == DOUBLE_BITS:
        z = _similarity_numpy(space, float(t))
        try:
            w = np.linalg.solve(z, np.ones(space.n))
        except np.linalg.LinAlgError:
            raise SingularityError(f"similarity matrix singular at t={t}") from None
        cond = float(np.linalg.cond(z, p=np.inf))
        value = float(w.sum())
    else:
        value, cond = magnitude_mp(space, t, precision)
        cond = float(cond)
    if not math.isfinite(cond) or cond * 2.0 ** (-precision) > 1 / 16:
        raise SingularityError(f"similarity matrix numerically singular at t={t} (cond {cond:.3g})")
    return MagnitudeSample(t, value, cond)


def scale_grid(t_min, t_max, count: int, spacing: str = "linear") -> list:
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    if count < 2:
        raise ValueError("need at least two grid points")
    if spacing == "linear":
        ts = np.linspace(t_min, t_max, count)
    elif spacing == "geometric":
        ts = np.geomspace(t_min, t_max, count)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    ts = [float(t) for t in ts]
    ts[0], ts[-1] = float(t_min), float(t_max)
    return ts


def magnitude_grid(
    space: FiniteMetricSpace,
    t_min,
    t_max,
    count: int,
    spacing: str = "linear",
    precision: int = DOUBLE_BITS,
) -> SampleGrid:
    """Evaluate :func:`magnitude_at` on a grid; singular scales are flagged, not dropped."""
    samples = []
    for t in scale_grid(t_min, t_max, count, spacing):
        try:
            samples.append(magnitude_at(space, t, precision))
        except SingularityError:
            samples.append(MagnitudeSample(t, math.nan, math.inf, singular=True))
    return SampleGrid(tuple(samples))


def magnitude_complete_graph(n: int, a, t):
    """Closed form ``n / (1 + (n-1) exp(-t a))`` for ``n`` points at mutual distance ``a``."""
    if n < 2 or not a > 0:
        raise ValueError("need n >= 2 and a > 0")
    if isinstance(t, mpmath.mpf):
        return n / (1 + (n - 1) * mpmath.exp(-t * mpmath.mpf(a)))
    return n / (1 + (n - 1) * math.exp(-float(t) * float(a)))


def grid_to_csv(grid: SampleGrid, digits: int = 12) -> str:
    lines = ["t,M,cond"]
    for s in grid.samples:
        if s.singular:
            lines.append(f"{s.t:.{digits}f},nan,inf")
        else:
            value = mpmath.nstr(s.value, digits + 6, min_fixed=-mpmath.inf, max_fixed=mpmath.inf) \
                if isinstance(s.value, mpmath.mpf) else f"{s.value:.{digits}f}"
            lines.append(f"{s.t:.{digits}f},{value},{s.condition_estimate:.6g}")
    return "\n".join(lines) + "\n"


def grid_from_csv(text: str) -> SampleGrid:
    from .errors import ParseError

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "t,M,cond":
        raise ParseError("sample CSV must start with header 't,M,cond'", line=1, column=1)
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError("expected three comma-separated fields", line=lineno, column=1)
        try:
            t = float(parts[0])
            cond = float(parts[2])
            singular = parts[1].strip() == "nan"
            if singular:
                value = math.nan
            else:
                with mpmath.workdps(max(15, len(parts[1].strip()) + 5)):
                    value = mpmath.mpf(parts[1].strip())
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, column=1) from None
        samples.append(MagnitudeSample(t, value, cond, singular))
    return SampleGrid(tuple(samples))
