"""JSON space files and certificate serialization.

Two input forms are accepted::

    {"n": 3, "labels": ["a", "b", "c"], "d": [["0", "3", "4"], ...]}
    {"points": [["0", "0"], ["3", "0"]], "metric": "euclidean-squared-rational"}

Entries are strings parsed exactly ("p/q" or decimal literals).  Point clouds are kept
only when every squared distance is the square of a rational.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

from .errors import ParseError
from .metric import FiniteMetricSpace, to_fraction
from .series import format_rational

POINT_METRIC = "euclidean-squared-rational"


def _exact(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"{where}: expected a string or integer, got {type(value).__name__}")
    try:
        return to_fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: {value!r} is not an exact rational") from None


def rational_sqrt(x: Fraction) -> Fraction:
    """Exact square root of a non-negative rational, or ParseError."""
    if x < 0:
        raise ParseError(f"negative squared distance {x}")
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num != x.numerator or den * den != x.denominator:
        raise ParseError(f"distance sqrt({x}) is irrational; exact input required")
    return Fraction(num, den)


def space_from_obj(obj) -> FiniteMetricSpace:
    if not isinstance(obj, dict):
        raise ParseError("space file must hold a JSON object")
    labels = obj.get("labels")
    if "points" in obj:
        if obj.get("metric") != POINT_METRIC:
            raise ParseError(f'point clouds need "metric": "{POINT_METRIC}"')
        pts = [[_exact(c, f"points[{i}][{k}]") for k, c in enumerate(p)] for i, p in enumerate(obj["points"])]
        if len({len(p) for p in pts}) > 1:
            raise ParseError("points have mixed dimensions")
        d = [[rational_sqrt(sum(((a - b) ** 2 for a, b in zip(p, q)), Fraction(0))) for q in pts] for p in pts]
        return FiniteMetricSpace(d, labels)
    if "d" not in obj:
        raise ParseError('space file needs a "d" matrix or "points"')
    rows = obj["d"]
    n = obj.get("n", len(rows))
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise ParseError(f'"d" must be a full {n} x {n} matrix')
    d = [[_exact(x, f"d[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(rows)]
    return FiniteMetricSpace(d, labels)


def loads_space(text: str) -> FiniteMetricSpace:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return space_from_obj(obj)


def load_space(path) -> FiniteMetricSpace:
    return loads_space(Path(path).read_text())


def space_to_obj(space: FiniteMetricSpace) -> dict:
    obj = {"n": space.n}
    if space.labels is not None:
        obj["labels"] = list(space.labels)
    obj["d"] = [[format_rational(x) for x in row] for row in space.d]
    return obj


def dumps_space(space: FiniteMetricSpace) -> str:
    return json.dumps(space_to_obj(space), indent=2) + "\n"


def dumps_json(obj) -> str:
    """Stable JSON: sorted keys, Fractions as "p/q" strings."""

    def default(x):
        if isinstance(x, Fraction):
            return format_rational(x)
        raise TypeError(f"not serializable: {type(x).__name__}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"
