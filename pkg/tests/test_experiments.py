import math
from fractions import Fraction

from magrecon.experiments import (
    digit_separated_space,
    experiment_k32,
    experiment_leinster_pair,
    experiment_identities,
    k32_curve_csv,
    roundtrip,
    tetrahedra_classes,
    tree_closed_form,
)
from magrecon.fixtures import k32_space, path_tree, star_tree
from magrecon.formal import path_expansion
from magrecon.metric import are_isometric, lengths_p_generic, satisfies_svti, validate


def test_tree_closed_form_at_ln2():
    assert math.isclose(tree_closed_form(math.log(2)), 2)


def test_tree_series_is_expansion_of_closed_form():
    # (4 - 2q) / (1 + q) = 4 - 6q + 6q^2 - 6q^3 + ...
    expected = {0: 4, **{k: 6 * (-1) ** k for k in range(1, 7)}}
    for tree in (path_tree((1, 1, 1)), star_tree((1, 1, 1))):
        assert path_expansion(tree, 6).series.as_dict() == expected


def test_leinster_report():
    rep = experiment_leinster_pair()
    assert rep.passed, rep.failures
    assert are_isometric(path_tree((1, 1, 1)), star_tree((1, 1, 1))) is None


def test_tetrahedra_class_count():
    classes = tetrahedra_classes()
    assert len(classes) == 30
    assert all(validate(s).ok and satisfies_svti(s) for s in classes)


def test_k32_report_and_metric():
    rep = experiment_k32()
    assert rep.passed and rep.metrics["delta4[4/3]"] == 0
    space = k32_space(Fraction(5, 2))
    assert space.d[3][4] == 2  # capped by the path through the other side
    assert validate(space).ok
    assert k32_curve_csv(count=5).count("\n") == 6


def test_identities_small_run():
    rep = experiment_identities(seed=3, count=20, dd_count=10, n3_count=10)
    assert rep.passed, rep.failures


def test_digit_separated_spaces_are_generic():
    space = digit_separated_space(5, seed=0)
    assert satisfies_svti(space)
    assert lengths_p_generic(space.edge_lengths(), 5)


def test_roundtrip_reports_and_parallel_agree():
    serial = roundtrip(4, 6, "n4_svti", seed=2)
    parallel = roundtrip(4, 6, "n4_svti", seed=2, workers=2)
    assert serial.passed
    assert serial.to_dict() == parallel.to_dict()
    assert "runtime" not in serial.to_dict() and "runtime" in serial.to_dict(include_runtime=True)
