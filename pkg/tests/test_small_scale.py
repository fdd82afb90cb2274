import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magrecon.errors import DegenerateError, WrongSizeError
from magrecon.fixtures import (
    TETRA_EDGES,
    collinear,
    complete_space,
    tetrahedron,
    triangle,
    two_point,
    unit_square_graph,
)
from magrecon.metric import random_metric_space
from magrecon.numeric import magnitude_mp
from magrecon.small_scale import (
    compute_nu_delta,
    delta2_closed,
    delta3_closed,
    delta3_polynomial,
    delta3_swap_difference,
    delta4_k32,
    derivative_limits,
    m1_general,
    m1_n4_closed,
    n3_closed_derivatives,
    n3_invariants,
    nu_delta_tsv,
    swap_d14_d23,
)

F = Fraction


def test_two_point_coefficients():
    c = compute_nu_delta(two_point(1), 4)
    # det = 1 - exp(-2t), cofactor sum = 2 - 2 exp(-t)
    assert c.delta == (0, 2, -2, F(4, 3), F(-2, 3))
    assert c.nu == (0, 2, -1, F(1, 3), F(-1, 12))


def test_delta2_examples():
    assert delta2_closed(triangle(3, 4, 5)) == 44 == compute_nu_delta(triangle(3, 4, 5)).delta[2]
    # sum over all six ordered permutations, halved; equals the series coefficient
    assert delta2_closed(complete_space(3, 1)) == 3 == compute_nu_delta(complete_space(3, 1)).delta[2]


def test_delta3_examples():
    assert compute_nu_delta(collinear([0, 1, 2, 3])).delta[3] == 8
    assert delta3_closed(collinear([0, 1, 2, 3])) == 8
    assert compute_nu_delta(unit_square_graph()).delta[3] == 0
    assert delta3_polynomial(complete_space(4, 1)) == 4


def test_n3_derivatives_345():
    m = derivative_limits(triangle(3, 4, 5))
    assert (m.M1, m.M2, m.M3) == (F(30, 11), F(360, 121), F(-22725, 1331))
    assert n3_closed_derivatives(3, 4, 5) == m
    assert n3_invariants(3, 4, 5) == (12, 44, 48)


def test_equilateral_m1():
    assert derivative_limits(complete_space(3, 1)).M1 == F(2, 3)


def test_m1_finite_difference_oracle():
    # central difference about t = 0; the magnitude function is analytic through 0
    space = triangle(3, 4, 5)
    with mpmath.workprec(400):
        h = mpmath.mpf("1e-4")
        plus, _ = magnitude_mp(space, h, 400)
        minus, _ = magnitude_mp(space, -h, 400)
        fd = (plus - minus) / (2 * h)
    assert abs(fd - mpmath.mpf(30) / 11) < 1e-6


def test_m1_n4_closed_examples():
    assert m1_n4_closed(complete_space(4, 1)) == derivative_limits(complete_space(4, 1)).M1 == F(3, 4)
    for perm in itertools.permutations(TETRA_EDGES):
        space = tetrahedron(*perm)
        assert m1_n4_closed(space) == derivative_limits(space).M1


def test_swap_difference():
    space = tetrahedron(*TETRA_EDGES)
    assert delta3_swap_difference(space) == -30
    assert m1_n4_closed(space) != m1_n4_closed(swap_d14_d23(space))
    assert swap_d14_d23(swap_d14_d23(space)) == space
    equal_pair = tetrahedron(7, 8, 9, 10, 11, 7)
    assert delta3_swap_difference(equal_pair) == 0


def test_delta4_k32_values():
    expected = {F(1, 2): 5, F(1): 4, F(4, 3): 0, F(3, 2): -3, F(2): -16}
    for ell, value in expected.items():
        assert delta4_k32(ell) == value


def test_size_guards():
    with pytest.raises(WrongSizeError):
        delta2_closed(complete_space(4, 1))
    with pytest.raises(WrongSizeError):
        m1_n4_closed(triangle(3, 4, 5))
    with pytest.raises(DegenerateError):
        n3_closed_derivatives(0, 1, 1)  # two coincident points: delta_2 = 0


def test_tsv_layout():
    text = nu_delta_tsv(compute_nu_delta(two_point(1), 2))
    assert text == "k\tnu\tdelta\n0\t0\t0\n1\t2\t2\n2\t-1\t-2\n"


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10 ** 6))
def test_leading_coefficients_vanish_and_agree(n, seed):
    space = random_metric_space(n, seed=seed)
    c = compute_nu_delta(space, n)
    assert all(c.nu[k] == 0 == c.delta[k] for k in range(n - 1))
    assert c.nu[n - 1] == c.delta[n - 1]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_three_point_closed_forms_and_positivity(seed):
    space = random_metric_space(3, seed=seed)
    d = space.d
    assert n3_closed_derivatives(d[0][1], d[0][2], d[1][2]) == derivative_limits(space)
    assert delta2_closed(space) == compute_nu_delta(space).delta[2] > 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_four_point_identities(seed):
    space = random_metric_space(4, seed=seed)
    c = compute_nu_delta(space)
    assert delta3_closed(space) == delta3_polynomial(space) == c.delta[3] >= 0
    assert m1_general(c) == derivative_limits(space, c).M1
    delta3_swap_difference(space)
