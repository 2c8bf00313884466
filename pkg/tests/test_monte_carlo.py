import math

import numpy as np
import pytest
from pydantic import ValidationError

from nc_restriction.deleeuw_harness import delta_exact
from nc_restriction.finite_groups import build_group, parse_subset
from nc_restriction.lie_geometry import GroupMatrix, InvalidRadiusError, adjoint_norm, build_model, random_rotation
from nc_restriction.monte_carlo import (
    DegenerateSeriesError,
    MalformedNeighbourhoodError,
    McConfig,
    Neighbourhood,
    RadiusTooLargeError,
    count_series,
    delta_mc,
    delta_mc_finite,
    growth_fit,
    key_lemma_ratio,
    key_lemma_schedule,
    largest_divisor,
    lower_bound_consistency,
    parse_neighbourhood,
    sample_adjoint_ball,
    sl2z_count,
    volume_mc,
)

sl2 = build_model("sl:2")


def unit_ball(points):
    return np.sum(points**2, axis=1) < 1.0


def test_McConfig():
    assert McConfig(samples=10_000_000).batch == 1_000_000
    assert McConfig(samples=30_000).batch == 30_000
    assert McConfig(samples=40_000, batch=10_000).batches == 4
    assert largest_divisor(1_500_000) == 750_000


def test_ValidationError():
    with pytest.raises(ValidationError):
        McConfig(samples=100)
    with pytest.raises(ValidationError):
        McConfig(samples=10_000, batch=3)
    with pytest.raises(ValidationError):
        McConfig(samples=10_000, chunks=2)


def test_volume_of_the_unit_ball():
    estimate = volume_mc(unit_ball, 1.0, 3, McConfig(samples=100_000, seed=1))
    assert abs(estimate.mean - 4.0 * math.pi / 3.0) <= 4.0 * estimate.stderr
    assert not estimate.zero_information


def test_stderr_shrinks_with_samples():
    small = volume_mc(unit_ball, 1.0, 3, McConfig(samples=20_000, seed=2))
    large = volume_mc(unit_ball, 1.0, 3, McConfig(samples=40_000, seed=2))
    assert large.stderr / small.stderr == pytest.approx(1.0 / math.sqrt(2.0), rel=0.05)


def test_workers_do_not_change_the_result():
    serial = volume_mc(unit_ball, 1.0, 3, McConfig(samples=40_000, batch=10_000, seed=3))
    threaded = volume_mc(unit_ball, 1.0, 3, McConfig(samples=40_000, batch=10_000, seed=3, workers=4))
    assert serial.hits == threaded.hits


def test_empty_set_has_no_stderr():
    estimate = volume_mc(lambda points: np.zeros(len(points), dtype=bool), 1.0, 2, McConfig(samples=10_000))
    assert estimate.mean == 0.0
    assert math.isnan(estimate.stderr)
    assert estimate.zero_information


def test_tube_ratio_is_one_without_scaling():
    row = key_lemma_ratio(0.05, 0.5, 1.0, McConfig(samples=20_000, seed=4))
    assert row.ratio == 1.0
    assert row.expected_exact == pytest.approx(1.0)


def test_tube_ratio_matches_exact_volume():
    row = key_lemma_ratio(0.05, 0.5, 2.0, McConfig(samples=200_000, seed=5))
    assert row.expected_limit == 2.0
    assert abs(row.ratio - row.expected_exact) <= 4.0 * row.stderr


def test_tube_schedule():
    schedule = key_lemma_schedule((0.025, 0.1, 0.05), 0.5, 2.0, McConfig(samples=50_000, seed=6))
    assert [row.eps for row in schedule.rows] == [0.1, 0.05, 0.025]
    assert schedule.final == schedule.rows[-1].ratio
    frame = schedule.to_frame()
    assert list(frame.columns) == ["eps", "R", "rho", "estimate", "stderr", "expected_exact", "samples", "seed"]
    with pytest.raises(InvalidRadiusError):
        key_lemma_schedule((), 0.5, 2.0)
    with pytest.raises(InvalidRadiusError):
        key_lemma_ratio(0.05, 0.5, 0.5)


def test_parse_neighbourhood():
    assert parse_neighbourhood("ball:0.5") == Neighbourhood("ball", 0.5)
    tube = parse_neighbourhood("tube:0.025,0.5")
    assert (tube.eps, tube.R, tube.half_width) == (0.025, 0.5, 0.5)


def test_MalformedNeighbourhoodError():
    for spec in ["disc:1", "ball:1,2", "tube:0.1", "ball:x"]:
        with pytest.raises(MalformedNeighbourhoodError):
            parse_neighbourhood(spec)
    with pytest.raises(MalformedNeighbourhoodError):
        delta_mc(build_model("sl:3"), [], Neighbourhood("tube", 0.5, 0.1), McConfig(samples=10_000))


def test_delta_mc_identity():
    estimate = delta_mc(sl2, [GroupMatrix(sl2, np.eye(2))], Neighbourhood("tube", 0.5, 0.1), McConfig(samples=20_000))
    assert estimate.mean == 1.0
    assert estimate.stderr == 0.0


def test_delta_mc_rotations_preserve_balls():
    rng = np.random.default_rng(7)
    F = [GroupMatrix(sl2, random_rotation(2, rng)) for _ in range(3)]
    estimate = delta_mc(sl2, F, Neighbourhood("ball", 1.0), McConfig(samples=20_000, seed=7))
    assert estimate.mean >= 0.999
    assert estimate.rejected == 0


def test_delta_mc_finite_matches_exact():
    group = build_group("dihedral:6")
    F = parse_subset(group, "indices:6")
    V = parse_subset(group, "indices:0,1,5,7")
    estimate = delta_mc_finite(F, V, McConfig(samples=40_000, seed=8))
    assert abs(estimate.mean - delta_exact(F, V).value) <= 4.0 * estimate.stderr


def test_sample_adjoint_ball():
    for g in sample_adjoint_ball(4.0, 20, np.random.default_rng(9)):
        assert adjoint_norm(g) <= 4.0 * (1 + 1e-9)


def test_lower_bound_consistency():
    check = lower_bound_consistency(2.0, 2, (0.2, 0.1), 0.5, McConfig(samples=20_000, seed=10))
    assert sorted(check.estimates) == [0.1, 0.2]
    assert check.bound == 0.5
    report = check.to_report()
    assert report.name == "adjoint ball lower bound"
    assert report.context["eps"] == 0.1


def test_sl2z_count():
    assert sl2z_count(0.5) == 0
    assert sl2z_count(1 + 1e-9) == 4
    assert sl2z_count(2.0) == 4
    assert sl2z_count(6.0) == 36


def test_RadiusTooLargeError():
    with pytest.raises(RadiusTooLargeError):
        sl2z_count(20_000)


def test_growth_fit():
    radii = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])
    slope, residual = growth_fit(radii, radii * np.log(radii), log_power=1)
    assert slope == pytest.approx(1.0)
    assert residual == pytest.approx(0.0, abs=1e-10)


def test_lattice_growth():
    series = count_series((100.0, 250.0, 500.0, 1000.0, 2500.0), log_power=0)
    assert 0.85 <= series.fitted_exponent <= 1.15
    assert list(series.to_frame().columns) == ["rho", "count"]
    corrected, _ = growth_fit(series.radii, series.counts, log_power=1)
    assert 0.7 <= corrected <= 1.0


def test_DegenerateSeriesError():
    with pytest.raises(DegenerateSeriesError):
        growth_fit([10.0, 20.0, 40.0, 80.0], [1, 2, 3, 4])
    with pytest.raises(DegenerateSeriesError):
        growth_fit([10.0, 11.0, 12.0, 13.0, 14.0], [1, 2, 3, 4, 5])
    with pytest.raises(DegenerateSeriesError):
        growth_fit([10.0, 30.0, 100.0, 300.0, 1000.0], [0, 2, 3, 4, 5])
