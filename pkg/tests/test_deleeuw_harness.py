import math
from fractions import Fraction

import numpy as np
import pytest

from nc_restriction.deleeuw_harness import (
    DisjointnessError,
    FundamentalDomainError,
    LatticeLevel,
    central_projection,
    delta_batch,
    delta_exact,
    dyadic_levels,
    embedding_contraction_residual,
    embedding_lower_residual,
    gram_matrix,
    lattice_maps_report,
    periodization_residual,
    periodize,
    random_gram_configurations,
    restriction_consistency,
    support_constant,
    untestable_report,
)
from nc_restriction.finite_groups import (
    GroupSubset,
    build_group,
    conjugate_set,
    identity_embedding,
    parse_subset,
    quotient_group,
    subgroup_embedding,
    word_ball,
)
from nc_restriction.group_algebra import convolve, random_element
from nc_restriction.multipliers import parse_symbol, random_symbol
from nc_restriction.noncommutative_lp import INF, InvalidExponentError
from nc_restriction.norm_estimation import OptimizerConfig

dihedral = build_group("dihedral:6")
F = parse_subset(dihedral, "indices:6")
V = parse_subset(dihedral, "indices:0,1,5,7")
rng = np.random.default_rng(23)


def test_delta_exact():
    value = delta_exact(F, V)
    assert value.fraction == Fraction(3, 4)
    assert value.value == 0.75
    assert delta_exact(GroupSubset(dihedral, ()), V).value == 1.0
    assert delta_exact(parse_subset(dihedral, "all"), dihedral.center()).value == 1.0


def test_delta_is_conjugation_invariant():
    for t in range(dihedral.order):
        moved = delta_exact(conjugate_set(t, F), conjugate_set(t, V))
        assert moved.fraction == Fraction(3, 4)


def test_delta_is_monotone_in_F():
    larger = parse_subset(dihedral, "indices:1,6")
    assert delta_exact(larger, V).fraction <= delta_exact(F, V).fraction


def test_delta_batch():
    configurations = random_gram_configurations(1, 20)
    serial = delta_batch(configurations)
    threaded = delta_batch(configurations, workers=4)
    assert [value.fraction for value in serial] == [value.fraction for value in threaded]


def test_support_constant():
    assert support_constant(F, [V]) == pytest.approx(math.sqrt(0.75))


def test_gram_matrix_is_positive():
    for F_random, V_random in random_gram_configurations(5, 50):
        assert gram_matrix(F_random, V_random).to_report().passed
    report = gram_matrix(parse_subset(dihedral, "indices:0,6"), V)
    assert report.matrix.shape == (2, 2)
    assert report.matrix[0, 0] == 1.0


def test_local_embedding_contraction():
    embedding = identity_embedding(dihedral)
    W = parse_subset(dihedral, "indices:0,6,9")
    for p in (1.0, 1.5, 2.0, 3.0, 4.0, INF):
        x = random_element(dihedral, rng, support=(0, 1, 2))
        report = embedding_contraction_residual(embedding, x, W, p)
        assert report.passed
    assert embedding_contraction_residual(embedding, x, W, 2.0).name == "local embedding isometry"


def test_DisjointnessError():
    embedding = identity_embedding(dihedral)
    x = random_element(dihedral, rng, support=(0, 1))
    with pytest.raises(DisjointnessError):
        embedding_contraction_residual(embedding, x, word_ball(dihedral, 1), 3.0)


def test_local_embedding_lower_bound():
    larger = build_group("dihedral:12")
    lattice = subgroup_embedding(larger, (0, 12))
    W = parse_subset(larger, "indices:0,1,11,15")
    for p in (3.0, 4.0, 6.0):
        report = embedding_lower_residual(lattice, random_element(lattice.sub, rng), W, p)
        assert report.passed
        assert report.context["bound"] <= report.context["embedded"] + 1e-9
    with pytest.raises(InvalidExponentError):
        embedding_lower_residual(lattice, random_element(lattice.sub, rng), W, 2.0)


def test_untestable_report():
    report = untestable_report("local embedding lower bound", "condition fails")
    assert math.isnan(report.residual)
    assert not report.passed


def test_restriction_consistency():
    embedding = subgroup_embedding(dihedral, [0, 2, 4])
    m = parse_symbol(dihedral, "positive:9")
    cfg = OptimizerConfig(restarts=3, max_iterations=40, seed=2)
    report = restriction_consistency(embedding, m, (3.0,), 3.0, cfg)
    assert report.passed
    assert report.context["restricted"] <= report.context["ambient"] + 1e-6


def test_periodization():
    for descriptor, normal in [("cyclic:4", "indices:0,2"), ("dihedral:3", "indices:0,1,2")]:
        group = build_group(descriptor)
        qmap = quotient_group(group, parse_subset(group, normal).array)
        for arity in (1, 2):
            report = periodization_residual(qmap, random_symbol(qmap.quotient, arity, rng), trials=4, seed=1)
            assert report.passed


def test_periodize_and_central_projection():
    group = build_group("cyclic:4")
    qmap = quotient_group(group, [0, 2])
    m_q = random_symbol(qmap.quotient, 1, rng)
    lifted = periodize(qmap, m_q)
    assert lifted(3) == m_q(1)
    projection = central_projection(qmap)
    assert np.allclose(convolve(projection, projection).coeffs, projection.coeffs)


def test_lattice_maps():
    group = build_group("cyclic:64")
    reports = lattice_maps_report(dyadic_levels(group, (3, 2, 1)), parse_symbol(group, "vonmises:2", 2), trials=2)
    assert len(reports) == 4
    assert all(report.passed for report in reports)


def test_FundamentalDomainError():
    group = build_group("cyclic:4")
    embedding = subgroup_embedding(group, [0, 2])
    with pytest.raises(FundamentalDomainError):
        LatticeLevel(embedding, GroupSubset(group, (0, 2)))
    with pytest.raises(FundamentalDomainError):
        lattice_maps_report([], parse_symbol(group, "constant:1"))
