import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magrecon.errors import (
    AmbiguityError,
    DegenerateError,
    ExhaustionError,
    MismatchError,
    MultiplicityError,
    ReconstructionError,
    SvtiViolationError,
)
from magrecon.experiments import digit_separated_space
from magrecon.fixtures import complete_space, path_tree, tetrahedron, triangle, two_point
from magrecon.formal import f_series, g_series, opposite_sums, path_expansion
from magrecon.metric import (
    FiniteMetricSpace,
    are_isometric,
    enumerate_index_sets,
    lengths_p_generic,
    random_metric_space,
)
from magrecon.numeric import magnitude_grid
from magrecon.reconstruction import (
    EdgeLengthMultiset,
    N3Invariants,
    OppositePairing,
    approximate_n3_sides,
    assemble_from_triples,
    configurations,
    detect_complete_graph,
    edges_from_series_ri,
    edges_from_series_svti,
    n4_opposite_combination,
    n4_opposite_sums,
    n4_resolve_swap,
    reconstruct,
    reconstruct_n3,
    solve_side_cubic,
    triple_sums_from_series,
)
from magrecon.series import GeneralizedSeries
from magrecon.small_scale import AsymptoticDerivatives, derivative_limits, m1_n4_closed, swap_d14_d23

F = Fraction


def series_of(space, K=3):
    return path_expansion(space, K).series


def space_triples(space):
    d = space.d
    tri = [(d[i][j], d[j][k], d[i][k]) for i, j, k in enumerate_index_sets(space.n, "triangles")]
    paths = [(d[i][j], d[j][k], d[k][l]) for i, j, k, l in enumerate_index_sets(space.n, "open3paths")]
    return tri, paths


# --- three points -------------------------------------------------------------


def test_n3_from_exact_limits():
    space = reconstruct_n3(AsymptoticDerivatives(F(30, 11), F(360, 121), F(-22725, 1331)))
    assert space.edge_lengths() == [3, 4, 5]
    eq = reconstruct_n3(derivative_limits(complete_space(3, 1)))
    assert eq.edge_lengths() == [1, 1, 1]


def test_n3_invariants_match_forward_values():
    inv = N3Invariants.from_sides(F(3), F(4), F(5))
    assert (inv.x, inv.y, inv.z) == (6, 4, 2)
    assert (inv.s1, inv.s2, inv.s3) == (12, 44, 48)


def test_n3_rejects_bad_limits():
    with pytest.raises(DegenerateError):
        reconstruct_n3(AsymptoticDerivatives(F(-1), F(1), F(1)))


def test_side_cubic_irrational_roots():
    # (x - 2)(x^2 - 4x + 1): roots 2 and 2 +- sqrt(3)
    roots, exact = solve_side_cubic(F(6), F(9), F(2))
    assert not exact
    assert abs(roots[0] - (2 - 3 ** 0.5)) < 1e-12 and abs(roots[2] - (2 + 3 ** 0.5)) < 1e-12
    roots, exact = solve_side_cubic(F(12), F(47), F(60))
    assert exact and roots == [3, 4, 5]


def test_approximate_sides_are_tight():
    bounds = approximate_n3_sides(derivative_limits(triangle(3, 4, 5)))
    for (lo, hi), side in zip(bounds, (3, 4, 5)):
        assert lo < side < hi and hi - lo < 1e-29


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_n3_roundtrip(seed):
    space = random_metric_space(3, seed=seed)
    assert are_isometric(reconstruct_n3(derivative_limits(space)), space) is not None


# --- edges ----------------------------------------------------------------------


def test_edges_ri_two_point():
    assert edges_from_series_ri(series_of(two_point(1), 6), 1).lengths == (1,)


def test_edges_ri_digit_separated():
    space = digit_separated_space(4, seed=2)
    assert list(edges_from_series_ri(series_of(space), 6).lengths) == space.edge_lengths()


def test_edges_ri_exhaustion():
    multiples = GeneralizedSeries.from_dict({0: 2, 1: -2, 2: 2, 3: -2}, F(4))
    with pytest.raises(ExhaustionError):
        edges_from_series_ri(multiples, 2)


def test_edges_svti_examples():
    assert edges_from_series_svti(series_of(tetrahedron(7, 8, 9, 10, 11, 12)), 6).lengths == tuple(range(7, 13))
    assert edges_from_series_svti(series_of(complete_space(4, 1)), 6).lengths == (1,) * 6
    with pytest.raises(MultiplicityError):
        edges_from_series_svti(series_of(path_tree((1, 1, 1)), 4), 6)
    with pytest.raises(SvtiViolationError):
        edges_from_series_svti(GeneralizedSeries.from_dict({0: 3, 1: -2, 2: -2, 3: -2}, F(4)), 3)
    with pytest.raises(MultiplicityError):
        edges_from_series_svti(GeneralizedSeries.from_dict({0: 3, 1: -3}, F(2)), 3)


def test_detect_complete_graph():
    for n in range(2, 7):
        assert detect_complete_graph(series_of(complete_space(n, F(3, 2)), 2), n) == F(3, 2)
    assert detect_complete_graph(series_of(complete_space(4, 1)), 4) == 1
    assert detect_complete_graph(series_of(tetrahedron(7, 8, 9, 10, 11, 12)), 4) is None
    assert detect_complete_graph(series_of(two_point(5), 2), 2) == 5


# --- triangles and open 3-paths ----------------------------------------------------


def test_triple_sums_345():
    data = triple_sums_from_series(series_of(triangle(3, 4, 5), 4), EdgeLengthMultiset((3, 4, 5)))
    assert data.triangle_sums == (12,)
    assert data.open3path_sums == (9, 10, 11, 11, 12, 13, 13, 14, 15)


def test_triple_sums_digit_separated():
    space = digit_separated_space(4, seed=1)
    data = triple_sums_from_series(series_of(space), EdgeLengthMultiset(space.edge_lengths()))
    tri, paths = space_triples(space)
    assert len(data.triangle_sums) == 4
    assert sorted(data.triangle_sums) == sorted(sum(t) for t in tri)
    assert sorted(data.open3path_sums) == sorted(sum(p) for p in paths)


def test_triple_sums_ambiguity():
    # a triangle sum equal to a simple open 3-path sum on distinct edges
    space = tetrahedron(10, 11, 15, 14, 16, 12)
    tri, paths = space_triples(space)
    simple = {sum(p) for p in paths if len(set(p)) == 3}
    assert {sum(t) for t in tri} & simple
    with pytest.raises(AmbiguityError):
        triple_sums_from_series(series_of(space), EdgeLengthMultiset(space.edge_lengths()))


def test_assemble_examples():
    single = assemble_from_triples([(3, 4, 5)], [])
    assert single.edge_lengths() == [3, 4, 5]
    space = digit_separated_space(4, seed=7)
    assert are_isometric(assemble_from_triples(*space_triples(space)), space) is not None


def test_assemble_generic_five_points():
    seed = 0
    while True:
        space = random_metric_space(5, seed=seed)
        if lengths_p_generic(space.edge_lengths(), 3):
            break
        seed += 1
    assert are_isometric(assemble_from_triples(*space_triples(space)), space) is not None


# --- four points ---------------------------------------------------------------


def test_opposite_sums_total():
    for seed in range(10):
        space = random_metric_space(4, seed=seed, svti=True)
        edges = EdgeLengthMultiset(space.edge_lengths())
        sums, _ = n4_opposite_sums(f_series(space), edges)
        assert sum(sums) == sum(edges.lengths)
        assert list(sums) == opposite_sums(space)


def test_equal_opposite_sums_case1():
    space = tetrahedron(7, 8, 9, 10, 11, 12)  # pairs (7,12), (8,11), (9,10)
    sums, case = n4_opposite_sums(f_series(space), EdgeLengthMultiset(space.edge_lengths()))
    assert sums == (19, 19, 19) and case == "case1"


def test_constructed_case2():
    # smallest pair (10, 11); the others sum to 2*10 + 11 and 10 + 2*11
    space = tetrahedron(10, 15, 14, 18, 16, 11)
    sums, case = n4_opposite_sums(f_series(space), EdgeLengthMultiset(space.edge_lengths()))
    assert case == "case2" and sums == (21, 31, 32)


def _spaces_for(pairs):
    (a1, b1), (a2, b2), (a3, b3) = pairs
    return [tetrahedron(a1, a2, x, y, b2, b1) for x, y in ((a3, b3), (b3, a3))]


@pytest.mark.parametrize("lengths, comb", [
    ((10, 11, 13, 14, 15, 17), "COMB1"),
    ((10, 11, 13, 14, 15, 17), "COMB2"),
    ((10, 11, 13, 13, 14, 16), "COMB1"),
    ((10, 11, 13, 13, 14, 16), "COMB2"),
])
def test_comb_discriminator(lengths, comb):
    l = lengths
    pairs = {"COMB1": [(l[0], l[4]), (l[2], l[3]), (l[1], l[5])],
             "COMB2": [(l[1], l[3]), (l[0], l[5]), (l[2], l[4])]}[comb]
    for space in _spaces_for(pairs):
        edges = EdgeLengthMultiset(space.edge_lengths())
        sums = opposite_sums(space)
        chosen = n4_opposite_combination(g_series(space), edges, sums)
        assert chosen.comb_choice == comb
        assert chosen.pairs == OppositePairing.from_pairs(pairs, comb).pairs


def test_unique_pairing_generic():
    space = random_metric_space(4, seed=4, svti=True, min_gap=F(1, 50))
    edges = EdgeLengthMultiset(space.edge_lengths())
    assert n4_opposite_combination(g_series(space), edges, opposite_sums(space)).comb_choice == "unique"


def test_swap_resolution_by_m1():
    truth = tetrahedron(7, 8, 9, 10, 11, 12)
    other = swap_d14_d23(truth)
    assert m1_n4_closed(truth) != m1_n4_closed(other)
    pairing = OppositePairing.from_pairs([(7, 12), (8, 11), (9, 10)], "unique")
    chosen = n4_resolve_swap(pairing, m1_n4_closed(truth))
    assert are_isometric(chosen, truth) is not None
    rejected = swap_d14_d23(chosen)
    assert m1_n4_closed(rejected) == m1_n4_closed(other)
    with pytest.raises(MismatchError):
        n4_resolve_swap(pairing, F(1))


def test_vanishing_swap_difference_gives_isometric_candidates():
    for pairs in ([(7, 7), (8, 11), (9, 10)], [(7, 12), (8, 8), (9, 10)], [(7, 12), (8, 11), (9, 9)]):
        a, b = configurations(OppositePairing.from_pairs(pairs, "unique").pairs)
        assert are_isometric(a, b) is not None


# --- dispatch -----------------------------------------------------------------------


def test_reconstruct_routes():
    r = reconstruct(derivative_limits(triangle(3, 4, 5)), 3)
    assert r.certificate.applied == "three-point"
    space = digit_separated_space(5, seed=3)
    for mode in ("ri", "svti_generic"):
        r = reconstruct(series_of(space), 5, mode=mode)
        assert are_isometric(r.space, space) is not None
        assert all(c["passed"] for c in r.certificate.checks)
    k4 = reconstruct(series_of(complete_space(4, 2)), 4)
    assert k4.certificate.applied == "complete-graph" and k4.space.edge_lengths() == [2] * 6


def test_reconstruct_all_tetrahedra_labelings():
    for perm in itertools.permutations(range(7, 13)):
        space = tetrahedron(*perm)
        r = reconstruct(series_of(space), 4, mode="n4_svti", m1=m1_n4_closed(space))
        assert are_isometric(r.space, space) is not None


def test_reconstruct_needs_m1_for_four_points():
    with pytest.raises(ReconstructionError):
        reconstruct(series_of(tetrahedron(7, 8, 9, 10, 11, 12)), 4, mode="n4_svti")


def test_reconstruct_rejects_wrong_point_count():
    with pytest.raises(ReconstructionError):
        reconstruct(series_of(triangle(3, 4, 5)), 4, mode="ri")


def test_reconstruct_two_points_from_samples():
    grid = magnitude_grid(two_point(F(3, 2)), 1, 60, 40, spacing="geometric", precision=256)
    r = reconstruct(grid, 2, extraction_options={"max_terms": 2})
    assert r.space.d[0][1] == F(3, 2)


def test_coarse_data_falls_back_and_is_recorded():
    space = tetrahedron(F(5, 4), 1, F(7, 4), F(5, 4), 1, F(7, 4))
    r = reconstruct(series_of(space), 4, mode="n4_svti", m1=m1_n4_closed(space))
    assert are_isometric(r.space, space) is not None
    assert r.certificate.case_path[-1].startswith("fallback")
