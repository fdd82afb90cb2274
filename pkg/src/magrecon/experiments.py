"""Reproducible experiments: every concrete example and identity, checked end to end."""

from __future__ import annotations

import itertools
import math
import random
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MagnitudeError
from .fixtures import TETRA_EDGES, k32_space, path_tree, star_tree, tetrahedron
from .formal import path_expansion
from .metric import (
    FiniteMetricSpace,
    are_isometric,
    canonical_form,
    random_metric_space,
    satisfies_svti,
    validate,
)
from .numeric import grid_to_csv, magnitude_at, magnitude_grid, scale_grid
from .reconstruction import reconstruct
from .small_scale import (
    compute_nu_delta,
    delta2_closed,
    delta3_closed,
    delta3_polynomial,
    delta3_swap_difference,
    delta4_k32,
    delta4_k32_formula,
    derivative_limits,
    m1_general,
    n3_closed_derivatives,
)

K32_ELLS = (Fraction(1, 2), Fraction(1), Fraction(4, 3), Fraction(3, 2), Fraction(2))
ROUNDTRIP_MODES = ("n3", "n4_svti", "ri", "svti_generic", "auto")


@dataclass
class ExperimentReport:
    name: str
    status: str = "pass"
    metrics: dict = field(default_factory=dict)
    runtime: float = 0.0
    failures: list = field(default_factory=list)

    def check(self, label: str, ok: bool):
        if not ok:
            self.status = "fail"
            self.failures.append(label)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {"name": self.name, "status": self.status, "metrics": self.metrics, "failures": self.failures}
        if include_runtime:
            out["runtime"] = round(self.runtime, 3)
        return out


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        report = fn(*args, **kwargs)
        report.runtime = time.perf_counter() - start
        return report

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _common_threshold(*series):
    return min(s.exact_below for s in series)


def _same_below(a, b) -> bool:
    t = _common_threshold(a, b)
    return a.truncated(t).terms == b.truncated(t).terms


def tree_closed_form(t: float) -> float:
    q = math.exp(-t)
    return (4 - 2 * q) / (1 + q)


@_timed
def experiment_leinster_pair() -> ExperimentReport:
    """Path and star trees on four vertices share their magnitude but are not isometric."""
    rep = ExperimentReport("leinster-pair")
    path, star = path_tree((1, 1, 1)), star_tree((1, 1, 1))
    sp, ss = path_expansion(path, 6).series, path_expansion(star, 6).series
    rep.check("series agree", _same_below(sp, ss))
    rep.metrics["series_threshold"] = _common_threshold(sp, ss)
    worst = 0.0
    for t in scale_grid(0.1, 10, 50):
        for space in (path, star):
            worst = max(worst, abs(magnitude_at(space, t).value - tree_closed_form(t)))
    rep.metrics["max_abs_error"] = float(f"{worst:.3e}")
    rep.check("numeric matches closed form", worst < 1e-10)
    at_ln2 = magnitude_at(path, math.log(2)).value
    rep.check("value 2 at t = ln 2", abs(at_ln2 - 2) < 1e-12)
    rep.check("not isometric", are_isometric(path, star) is None)
    a, b = path_tree((1, 2, 3)), path_tree((2, 1, 3))
    sa, sb = path_expansion(a, 6).series, path_expansion(b, 6).series
    rep.check("weighted variant series agree", _same_below(sa, sb))
    rep.check("weighted variant not isometric", are_isometric(a, b) is None)
    return rep


def tetrahedra_classes(edges=TETRA_EDGES) -> list:
    classes = {}
    for perm in itertools.permutations(edges):
        space = tetrahedron(*perm)
        classes.setdefault(canonical_form(space), space)
    return [classes[k] for k in sorted(classes)]


@_timed
def experiment_tetrahedra(t_grid=None) -> ExperimentReport:
    """All labellings of {7..12} on a tetrahedron: count, separate, and reconstruct them."""
    rep = ExperimentReport("tetrahedra")
    spaces = tetrahedra_classes()
    rep.metrics["classes"] = len(spaces)
    rep.check("30 classes", len(spaces) == 30)
    rep.check("all valid", all(validate(s).ok for s in spaces))
    rep.check("all svti", all(satisfies_svti(s) for s in spaces))
    series = [path_expansion(s, 3).series for s in spaces]
    ts = list(t_grid) if t_grid is not None else scale_grid(0.01, 1.0, 40, "geometric")
    curves = [[magnitude_at(s, t).value for t in ts] for s in spaces]
    by_series = by_numeric = 0
    min_gap = math.inf
    for i, j in itertools.combinations(range(len(spaces)), 2):
        by_series += not _same_below(series[i], series[j])
        gap = max(abs(x - y) for x, y in zip(curves[i], curves[j]))
        min_gap = min(min_gap, gap)
        by_numeric += gap > 1e-6
    pairs = math.comb(len(spaces), 2)
    rep.metrics.update(pairs=pairs, separated_by_series=by_series, separated_numerically=by_numeric,
                       min_numeric_gap=float(f"{min_gap:.3e}"))
    rep.check("series separate all pairs", by_series == pairs)
    rep.check("numeric gap separates all pairs", by_numeric == pairs)
    ok = 0
    for space, s in zip(spaces, series):
        try:
            result = reconstruct(s, 4, mode="n4_svti", m1=m1_general(compute_nu_delta(space)))
            ok += are_isometric(result.space, space) is not None
        except MagnitudeError:
            pass
    rep.metrics["reconstructed"] = ok
    rep.check("all reconstruct", ok == len(spaces))
    return rep


def k32_curve_csv(ell=Fraction(3, 2), t_min=0.05, t_max=10.0, count=100, digits=12) -> str:
    """Plot-ready ``t,M,cond`` samples of the K_{3,2}-plus-edge magnitude function."""
    return grid_to_csv(magnitude_grid(k32_space(ell), t_min, t_max, count), digits)


@_timed
def experiment_k32(ells=K32_ELLS) -> ExperimentReport:
    """``delta_4`` of K_{3,2} with an extra edge against its closed form."""
    rep = ExperimentReport("k32")
    for ell in ells:
        ell = Fraction(ell)
        if not 0 < ell <= 2:
            raise ValueError("ell must lie in (0, 2]")
        try:
            value = delta4_k32(ell)
        except MagnitudeError:
            value = None
        rep.metrics[f"delta4[{ell}]"] = value
        rep.check(f"delta4 at {ell}", value == delta4_k32_formula(ell))
    curve = k32_curve_csv()
    rep.metrics["curve_rows"] = curve.count("\n") - 1
    return rep


def _identity_checks(space: FiniteMetricSpace) -> dict:
    n = space.n
    c = compute_nu_delta(space)
    out = {"ry": all(c.nu[k] == 0 and c.delta[k] == 0 for k in range(n - 1)) and c.nu[n - 1] == c.delta[n - 1]}
    if n == 3:
        out["delta2_closed"] = delta2_closed(space) == c.delta[2]
        out["delta2_positive"] = c.delta[2] > 0
    if n == 4:
        out["delta3_closed"] = delta3_closed(space) == c.delta[3] == delta3_polynomial(space)
        out["delta3_nonnegative"] = c.delta[3] >= 0
    return out


@_timed
def experiment_identities(seed: int = 0, count: int = 200, dd_count: int = 100, n3_count: int = 100) -> ExperimentReport:
    """Exact identities among the small-scale Taylor coefficients over random spaces."""
    rep = ExperimentReport("identities")
    rng = random.Random(seed)
    tallies = {}
    for k in range(count):
        space = random_metric_space(3 + k % 4, seed=rng.randrange(2 ** 32))
        for name, ok in _identity_checks(space).items():
            good, total = tallies.get(name, (0, 0))
            tallies[name] = (good + ok, total + 1)
    dd_ok = 0
    for _ in range(dd_count):
        try:
            delta3_swap_difference(random_metric_space(4, seed=rng.randrange(2 ** 32)))
            dd_ok += 1
        except MagnitudeError:
            pass
    tallies["dd_product"] = (dd_ok, dd_count)
    closed_ok = 0
    for _ in range(n3_count):
        space = random_metric_space(3, seed=rng.randrange(2 ** 32))
        d = space.d
        closed_ok += n3_closed_derivatives(d[0][1], d[0][2], d[1][2]) == derivative_limits(space)
    tallies["n3_closed_forms"] = (closed_ok, n3_count)
    for name, (good, total) in sorted(tallies.items()):
        rep.metrics[name] = f"{good}/{total}"
        rep.check(name, good == total)
    return rep


def digit_separated_space(n: int, seed: int) -> FiniteMetricSpace:
    """Edges ``B + 10^k`` for a shuffled ``k``; ``B`` keeps the lengths within svti and 5-generic."""
    N = math.comb(n, 2)
    digits = list(range(N))
    random.Random(seed).shuffle(digits)
    base = 10 ** (N + 1)
    pairs = itertools.combinations(range(n), 2)
    return FiniteMetricSpace.from_edges(n, {p: base + 10 ** k for p, k in zip(pairs, digits)})


def _roundtrip_one(args):
    n, mode, seed = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            if mode == "n3":
                space = random_metric_space(3, seed=seed)
                result = reconstruct(derivative_limits(space), 3, mode="n3")
            elif mode == "n4_svti":
                space = random_metric_space(4, seed=seed, svti=True)
                series = path_expansion(space, 3).series
                result = reconstruct(series, 4, mode="n4_svti", m1=m1_general(compute_nu_delta(space)))
            else:
                space = digit_separated_space(n, seed)
                series = path_expansion(space, 3).series
                m1 = m1_general(compute_nu_delta(space)) if n == 4 else None
                result = reconstruct(series, n, mode=mode, m1=m1)
        except MagnitudeError as exc:
            return False, f"seed {seed}: {type(exc).__name__}: {exc}"
    if are_isometric(result.space, space) is None:
        return False, f"seed {seed}: reconstructed space is not isometric"
    return True, None


@_timed
def roundtrip(n: int, count: int, mode: str, seed: int = 0, workers: int = 1) -> ExperimentReport:
    """Sample ``count`` spaces, reconstruct each from its magnitude data, compare."""
    if mode not in ROUNDTRIP_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "n3" and n != 3 or mode == "n4_svti" and n != 4:
        raise ValueError(f"mode {mode} needs n = {3 if mode == 'n3' else 4}")
    rng = random.Random(seed)
    jobs = [(n, mode, rng.randrange(2 ** 32)) for _ in range(count)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_roundtrip_one, jobs))
    else:
        results = [_roundtrip_one(j) for j in jobs]
    rep = ExperimentReport(f"roundtrip-{mode}-n{n}")
    ok = sum(r for r, _ in results)
    rep.metrics.update(count=count, reconstructed=ok, seed=seed)
    rep.failures.extend(msg for r, msg in results if not r)
    if ok != count:
        rep.status = "fail"
    return rep


EXPERIMENTS = {
    "leinster-pair": experiment_leinster_pair,
    "tetrahedra": experiment_tetrahedra,
    "k32": experiment_k32,
    "identities": experiment_identities,
}
