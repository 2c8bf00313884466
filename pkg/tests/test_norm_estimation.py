import numpy as np
import pytest
from pydantic import ValidationError

from nc_restriction.finite_groups import build_group
from nc_restriction.group_algebra import delta
from nc_restriction.multipliers import ArityMismatchError, constant_symbol, multiplier_ratio, parse_symbol
from nc_restriction.noncommutative_lp import INF, InvalidExponentError
from nc_restriction.norm_estimation import (
    OptimizerConfig,
    duality_report,
    estimate_norm,
    norm_estimate_from_json,
    smoothing_bias,
)

cyclic = build_group("cyclic:4")
dihedral = build_group("dihedral:3")
quick = OptimizerConfig(restarts=4, max_iterations=40, seed=7)


def test_l2_norm_of_linear_symbol_is_sup_norm():
    m = parse_symbol(dihedral, "random:1")
    estimate = estimate_norm(m, (2.0,), 2.0)
    assert estimate.value == pytest.approx(np.max(np.abs(m.values)))
    assert estimate.converged


def test_value_is_ratio_of_witness():
    m = parse_symbol(cyclic, "random:2", arity=2)
    estimate = estimate_norm(m, (4.0, 4.0), 2.0, quick)
    assert estimate.restarts == 4
    assert estimate.value == pytest.approx(multiplier_ratio(m, estimate.witness, (4.0, 4.0), 2.0), rel=1e-12)


def test_initial_witnesses_bound_the_value():
    m = parse_symbol(dihedral, "positive:5")
    peak = int(np.argmax(np.abs(m.values)))
    estimate = estimate_norm(m, (3.0,), 3.0, quick, initial_witnesses=[(delta(dihedral, peak),)])
    assert estimate.value >= np.abs(m.values[peak]) - 1e-12


def test_workers_do_not_change_the_result():
    m = parse_symbol(cyclic, "positive:3", arity=2)
    serial = estimate_norm(m, (3.0, 3.0), 1.5, quick)
    threaded = estimate_norm(m, (3.0, 3.0), 1.5, quick.model_copy(update={"workers": 3}))
    assert serial.value == threaded.value
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(serial.witness, threaded.witness))


def test_json_roundtrip():
    m = parse_symbol(cyclic, "random:4")
    estimate = estimate_norm(m, (3.0,), 3.0, quick)
    data = estimate.to_json()
    assert data["lower_bound_only"]
    rebuilt = norm_estimate_from_json(cyclic, data)
    assert rebuilt.value == estimate.value
    assert np.array_equal(rebuilt.witness[0].coeffs, estimate.witness[0].coeffs)


def test_ValidationError():
    with pytest.raises(ValidationError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(tolerance=1e-3)


def test_InvalidExponentError():
    m = parse_symbol(cyclic, "constant:1")
    with pytest.raises(InvalidExponentError):
        estimate_norm(m, (INF,), 2.0, quick)
    with pytest.raises(InvalidExponentError):
        estimate_norm(m, (2.0,), 0.5, quick)


def test_ArityMismatchError():
    m = parse_symbol(cyclic, "constant:1", arity=2)
    with pytest.raises(ArityMismatchError):
        estimate_norm(m, (2.0,), 2.0, quick)
    with pytest.raises(ArityMismatchError):
        duality_report(m, 3.0, quick)


def test_duality_report_is_informational():
    report = duality_report(parse_symbol(cyclic, "positive:1"), 3.0, quick)
    assert report.context["informational"]
    assert report.context["p_conjugate"] == pytest.approx(1.5)
    assert report.residual >= 0


def test_identity_multiplier_has_norm_one():
    m = constant_symbol(dihedral, 1)
    for p in [1.0, 1.5, 3.0]:
        assert estimate_norm(m, (p,), p, quick).value == pytest.approx(1.0, rel=1e-12)


def test_endpoint_one_is_smoothed():
    m = parse_symbol(cyclic, "positive:2")
    estimate = estimate_norm(m, (1.0,), 1.0, quick)
    assert estimate.exponents == (1.0,)
    assert estimate.smoothing == 1e-6
    assert estimate.smoothed_exponents == (1.0 + 1e-6,)
    assert estimate.smoothed_p == 1.0 + 1e-6
    assert estimate.bias_bound == pytest.approx(4 ** (2 * (1 - 1 / (1 + 1e-6))))
    assert 1.0 < estimate.bias_bound < 1.0 + 1e-5
    assert estimate.value == pytest.approx(multiplier_ratio(m, estimate.witness, (1.0,), 1.0), rel=1e-12)

    data = estimate.to_json()
    assert data["smoothed_exponents"] == [1.0 + 1e-6]
    assert data["bias_bound"] == estimate.bias_bound
    rebuilt = norm_estimate_from_json(cyclic, data)
    assert rebuilt.smoothed_p == estimate.smoothed_p
    assert rebuilt.bias_bound == estimate.bias_bound


def test_smoothing_bias():
    assert smoothing_bias(8, (3.0, 2.0), 1.5, 1e-6) == 1.0
    assert smoothing_bias(8, (1.0, 2.0), 1.0, 0.5) == pytest.approx(8 ** (2 / 3))


def test_character_indicator_on_cyclic_group():
    m = parse_symbol(cyclic, "indicator:indices:0,2")
    estimate = estimate_norm(m, (4.0,), 4.0, OptimizerConfig(restarts=8, seed=3))

    # dense random search over the unit sphere of C^4
    search = np.random.default_rng(0)
    best = 0.0
    for _ in range(10):
        x = search.standard_normal((100_000, 4)) + 1j * search.standard_normal((100_000, 4))
        numerator = np.mean(np.abs(np.fft.fft(x * m.values, axis=1)) ** 4, axis=1) ** 0.25
        denominator = np.mean(np.abs(np.fft.fft(x, axis=1)) ** 4, axis=1) ** 0.25
        best = max(best, float(np.max(numerator / denominator)))

    assert estimate.value >= best - 1e-9
    assert estimate.value <= 1.0 + 1e-9
    assert estimate.value == pytest.approx(1.0, abs=1e-3)
