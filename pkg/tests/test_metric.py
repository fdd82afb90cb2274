import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magrecon.errors import CapacityError
from magrecon.fixtures import collinear, complete_space, path_tree, tetrahedron, triangle
from magrecon.metric import (
    FiniteMetricSpace,
    are_isometric,
    canonical_form,
    enumerate_index_sets,
    invert_permutation,
    is_p_generic,
    lengths_p_generic,
    random_metric_space,
    satisfies_svti,
    to_fraction,
    validate,
)


def test_to_fraction_is_exact():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction("1.25") == Fraction(5, 4)
    assert to_fraction(7) == 7
    with pytest.raises(TypeError):
        to_fraction(0.1)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_validate_examples():
    assert validate(FiniteMetricSpace([[0, 1], [1, 0]])).ok
    bad = validate(FiniteMetricSpace([[0, 1, 3], [1, 0, 1], [3, 1, 0]]))
    assert not bad.ok
    kinds = {(kind, w[:2]) for kind, w in bad.violations}
    assert ("triangle", (0, 2)) in kinds
    tet = FiniteMetricSpace([[0, 7, 8, 9], [7, 0, 10, 11], [8, 10, 0, 12], [9, 11, 12, 0]])
    assert validate(tet).ok


def test_validate_catches_asymmetry_and_zero():
    report = validate(FiniteMetricSpace([[0, 1], [2, 0]]))
    assert ("symmetry", (0, 1)) in report.violations
    report = validate(FiniteMetricSpace([[0, 0], [0, 0]]))
    assert ("positivity", (0, 1)) in report.violations


def test_svti_examples():
    assert satisfies_svti(tetrahedron(7, 8, 9, 10, 11, 12))
    assert satisfies_svti(complete_space(3, 1))
    assert not satisfies_svti(path_tree((1, 1, 1)))


def test_genericity_examples():
    assert not lengths_p_generic([7, 8, 9, 10, 11, 12], 2)
    assert lengths_p_generic([1, 10, 100, 1000, 10000, 100000], 5)
    assert is_p_generic(FiniteMetricSpace([[0, 3], [3, 0]]), 6)
    with pytest.raises(CapacityError):
        lengths_p_generic([1, 2], 7)


def test_genericity_against_bruteforce():
    lengths = [Fraction(x) for x in (1, 2, 4, 9)]
    for p in (1, 2, 3):
        sums = [sum(c) for k in range(1, p + 1) for c in itertools.combinations_with_replacement(lengths, k)]
        assert lengths_p_generic(lengths, p) == (len(sums) == len(set(sums)))


def test_isometry_examples():
    t = triangle(3, 4, 5)
    assert are_isometric(t, t) == (0, 1, 2)
    relabeled = t.permuted((1, 2, 0))
    sigma = are_isometric(t, relabeled)
    assert sigma is not None
    assert all(t.d[i][j] == relabeled.d[sigma[i]][sigma[j]] for i in range(3) for j in range(3))
    assert are_isometric(path_tree((1, 2, 3)), path_tree((2, 1, 3))) is None


def test_invert_permutation():
    perm = (2, 0, 3, 1)
    inv = invert_permutation(perm)
    assert all(inv[perm[i]] == i for i in range(4))


def test_random_space_contract():
    s = random_metric_space(2, seed=5)
    assert s.n == 2 and s.d[0][1] > 0
    s4 = random_metric_space(4, seed=5, svti=True)
    assert validate(s4).ok and satisfies_svti(s4)
    assert random_metric_space(5, seed=11) == random_metric_space(5, seed=11)


def test_index_set_counts():
    assert len(enumerate_index_sets(4, "triangles")) == 4
    assert len(enumerate_index_sets(4, "opposite_pairs")) == 3
    assert enumerate_index_sets(2, "triangles") == []
    # open 3-paths: 3-step walks that do not close, counted once per direction pair
    for n in (3, 4, 5):
        expected = (n * (n - 1) ** 3 - n * (n - 1) * (n - 2)) // 2
        assert len(enumerate_index_sets(n, "open3paths")) == expected


def test_collinear_is_metric_but_not_svti():
    c = collinear([0, 1, 2, 3])
    assert validate(c).ok
    assert not satisfies_svti(c)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10 ** 6), data=st.data())
def test_relabeling_is_isometric_and_canonical(n, seed, data):
    space = random_metric_space(n, seed=seed)
    perm = data.draw(st.permutations(range(n)))
    other = space.permuted(perm)
    sigma = are_isometric(space, other)
    assert sigma is not None
    assert all(space.d[i][j] == other.d[sigma[i]][sigma[j]] for i in range(n) for j in range(n))
    assert canonical_form(space) == canonical_form(other)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 7), seed=st.integers(0, 10 ** 6))
def test_random_spaces_validate(n, seed):
    assert validate(random_metric_space(n, seed=seed)).ok
