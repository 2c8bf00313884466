from pathlib import Path

import numpy as np
import pytest

from nc_restriction.finite_groups import build_group, subgroup_embedding
from nc_restriction.group_algebra import convolve, delta, random_element
from nc_restriction.multipliers import (
    ArityMismatchError,
    FolnerRadiusError,
    InvalidIndexPatternError,
    MalformedSymbolSpecError,
    NonFiniteSymbolError,
    Symbol,
    SymbolSizeError,
    apply_multiplier,
    consummated_symbol,
    consummation_exponents,
    consummation_residual,
    constant_symbol,
    hertz_schur_transference_residual,
    load_symbol_csv,
    multiplier_ratio,
    nested_residual,
    parse_symbol,
    product_table,
    random_symbol,
    restrict_symbol,
    symbol_to_frame,
    transference_inputs,
    translation_residual,
)
from nc_restriction.noncommutative_lp import INF

DATA_PATH = Path(__file__).parent / "data"
symbol_path = DATA_PATH / "symbol_cyclic4.csv"

dihedral = build_group("dihedral:3")
cyclic = build_group("cyclic:4")
rng = np.random.default_rng(17)


def test_SymbolSizeError():
    with pytest.raises(SymbolSizeError):
        Symbol(dihedral, np.ones((6, 5)))


def test_NonFiniteSymbolError():
    with pytest.raises(NonFiniteSymbolError):
        Symbol(cyclic, np.array([1.0, np.nan, 0.0, 0.0]))


def test_parse_symbol():
    assert np.allclose(parse_symbol(dihedral, "constant:2", 2).values, 2.0)
    gaussian = parse_symbol(dihedral, "gaussian:1.0")
    assert gaussian(0) == pytest.approx(1.0)
    assert gaussian(1) == pytest.approx(np.exp(-0.5))
    assert parse_symbol(cyclic, "vonmises:2").values[0] == pytest.approx(1.0)
    indicator = parse_symbol(dihedral, "indicator:indices:0", 2)
    assert indicator(1, dihedral.inverse(1)) == 1.0
    assert indicator(1, 1) == 0.0
    positive = parse_symbol(dihedral, "positive:3", 2)
    assert np.all((positive.values.real >= 0.5) & (positive.values.real <= 1.5))
    assert np.array_equal(parse_symbol(dihedral, "random:4").values, parse_symbol(dihedral, "random:4").values)


def test_MalformedSymbolSpecError():
    for spec in ["wavelet:1", "gaussian:wide", "random:x"]:
        with pytest.raises(MalformedSymbolSpecError):
            parse_symbol(dihedral, spec)


def test_load_symbol_csv(tmp_path):
    m = load_symbol_csv(cyclic, str(symbol_path))
    assert m.arity == 1
    assert m.values.tolist() == [1.0, 0.5 - 0.5j, 0.0, 2.0 + 0.25j]
    path = tmp_path / "symbol.csv"
    symbol_to_frame(m).to_csv(path, index=False)
    assert np.array_equal(load_symbol_csv(cyclic, str(path)).values, m.values)


def test_product_table():
    table = product_table(dihedral, 3)
    assert table[1, 3, 2] == dihedral.multiply(dihedral.multiply(1, 3), 2)


def test_constant_symbol_is_product():
    x = random_element(dihedral, rng)
    y = random_element(dihedral, rng)
    assert np.allclose(apply_multiplier(constant_symbol(dihedral, 2), x, y).coeffs, convolve(x, y).coeffs)


def test_linear_multiplier_is_pointwise():
    m = random_symbol(dihedral, 1, rng)
    x = random_element(dihedral, rng)
    assert np.allclose(apply_multiplier(m, x).coeffs, m.values * x.coeffs)
    assert m.reflect()(1) == m(dihedral.inverse(1))


def test_multiplier_is_multilinear():
    m = random_symbol(dihedral, 3, rng)
    inputs = [random_element(dihedral, rng) for _ in range(3)]
    other = random_element(dihedral, rng)
    a, b = 0.7 - 1.3j, -2.1 + 0.4j
    for slot in range(3):
        mixed = list(inputs)
        mixed[slot] = a * inputs[slot] + b * other
        replaced = list(inputs)
        replaced[slot] = other
        expected = a * apply_multiplier(m, *inputs).coeffs + b * apply_multiplier(m, *replaced).coeffs
        assert np.allclose(apply_multiplier(m, *mixed).coeffs, expected, rtol=0, atol=1e-12)


def test_output_support_lies_in_product_set():
    m = random_symbol(dihedral, 2, rng)
    for first, second in [((1,), (2,)), ((0, 4), (1, 3)), ((2, 3, 5), (4,))]:
        x = random_element(dihedral, rng, support=first)
        y = random_element(dihedral, rng, support=second)
        products = {dihedral.multiply(s, t) for s in first for t in second}
        assert set(apply_multiplier(m, x, y).support().members) <= products


def test_ArityMismatchError():
    m = random_symbol(dihedral, 2, rng)
    with pytest.raises(ArityMismatchError):
        apply_multiplier(m, delta(dihedral, 0))
    with pytest.raises(ArityMismatchError):
        m.reflect()


def test_multiplier_ratio():
    m = constant_symbol(dihedral, 1)
    x = random_element(dihedral, rng)
    assert multiplier_ratio(m, [x], [3.0], 3.0) == pytest.approx(1.0)
    assert multiplier_ratio(m, [0 * x], [3.0], 3.0) == 0.0


def test_restrict_symbol():
    embedding = subgroup_embedding(dihedral, [0, 1, 2])
    m = random_symbol(dihedral, 2, rng)
    restricted = restrict_symbol(m, embedding)
    assert restricted.parent.order == 3
    assert restricted(1, 2) == m(1, 2)


def test_consummation_identity():
    m = random_symbol(dihedral, 2, rng)
    assert consummation_residual(m, (1, 3), 4, trials=3) <= 1e-10
    assert consummation_residual(random_symbol(dihedral, 1, rng), (1,), 3, trials=3) <= 1e-10
    assert consummated_symbol(m, (1, 2), 2).values.tolist() == m.values.tolist()
    assert consummation_exponents((4.0, 4.0, INF), (1, 3)) == pytest.approx((2.0, INF))


def test_InvalidIndexPatternError():
    m = random_symbol(dihedral, 2, rng)
    for indices, n in [((2, 3), 3), ((1, 1), 3), ((1, 4), 3), ((1,), 3)]:
        with pytest.raises(InvalidIndexPatternError):
            consummated_symbol(m, indices, n)
    with pytest.raises(InvalidIndexPatternError):
        translation_residual(m, 2, 1, 1, 1)


def test_translation_identity():
    m = random_symbol(dihedral, 3, rng)
    assert translation_residual(m, 1, 4, 2, 5, trials=3) <= 1e-10
    assert translation_residual(m, 2, 3, 1, 0, trials=3, exponents=(3.0, 3.0, 3.0), p=1.0) <= 1e-10


def test_nested_identity():
    symbols = [random_symbol(dihedral, 1, rng) for _ in range(3)]
    assert nested_residual(symbols, trials=3) <= 1e-10
    assert nested_residual(symbols[:1], trials=2) <= 1e-10


def test_transference_converges():
    group = build_group("cyclic:256")
    m, x, y, z = transference_inputs(group, 4, seed=1)
    results = [hertz_schur_transference_residual(m, alpha, 4.0, 4.0, x, y, z) for alpha in (8, 16, 32)]
    assert results[-1].relative <= 0.05
    assert results[0].relative >= results[1].relative >= results[2].relative


def test_FolnerRadiusError():
    group = build_group("cyclic:32")
    m, x, y, z = transference_inputs(group, 2, seed=0)
    with pytest.raises(FolnerRadiusError):
        hertz_schur_transference_residual(m, 9, 2.0, 2.0, x, y, z)
    with pytest.raises(ArityMismatchError):
        hertz_schur_transference_residual(random_symbol(group, 1, rng), 4, 2.0, 2.0, x, y, z)
