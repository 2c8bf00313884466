import numpy as np
import pytest

from nc_restriction.finite_groups import ParentMismatchError, build_group, parse_subset, subgroup_embedding
from nc_restriction.group_algebra import (
    AlgebraElement,
    InputLengthDoesNotMatchError,
    convolve,
    convolve_all,
    delta,
    element_from_matrix,
    indicator,
    involution,
    left_translate,
    pairing_coefficients,
    pull_back,
    push_forward,
    random_element,
    reflection,
    regular_matrix,
    right_translate,
    zero,
)

dihedral = build_group("dihedral:6")
heisenberg = build_group("heisenberg:2")
rng = np.random.default_rng(11)


def test_InputLengthDoesNotMatchError():
    with pytest.raises(InputLengthDoesNotMatchError):
        AlgebraElement(dihedral, np.zeros(5))


def test_convolution_of_point_masses():
    for a, b in [(1, 6), (6, 1), (7, 11), (3, 3)]:
        product = convolve(delta(dihedral, a), delta(dihedral, b))
        assert np.array_equal(product.coeffs, delta(dihedral, dihedral.multiply(a, b)).coeffs)


def test_regular_representation_is_multiplicative():
    for group in [dihedral, heisenberg]:
        f = random_element(group, rng)
        g = random_element(group, rng)
        assert np.allclose(regular_matrix(convolve(f, g)), regular_matrix(f) @ regular_matrix(g), atol=1e-12)


def test_involution_is_adjoint():
    f = random_element(heisenberg, rng)
    assert np.allclose(regular_matrix(involution(f)), regular_matrix(f).conj().T, atol=1e-14)
    assert np.allclose(reflection(reflection(f)).coeffs, f.coeffs)


def test_element_from_matrix():
    f = random_element(dihedral, rng)
    assert np.allclose(element_from_matrix(dihedral, regular_matrix(f)).coeffs, f.coeffs)


def test_pairing_coefficients():
    gradient = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    d = random_element(dihedral, rng)
    g = pairing_coefficients(dihedral, gradient)
    lhs = np.real(np.trace(gradient.conj().T @ regular_matrix(d)))
    rhs = np.real(np.sum(np.conj(g.coeffs) * d.coeffs))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_convolve_all():
    elements = [random_element(dihedral, rng) for _ in range(3)]
    expected = convolve(convolve(elements[0], elements[1]), elements[2])
    assert np.allclose(convolve_all(elements).coeffs, expected.coeffs)


def test_translations():
    f = delta(dihedral, 2)
    assert np.array_equal(left_translate(6, f).coeffs, delta(dihedral, dihedral.multiply(6, 2)).coeffs)
    assert np.array_equal(right_translate(f, 6).coeffs, delta(dihedral, dihedral.multiply(2, 6)).coeffs)


def test_push_forward_and_pull_back():
    embedding = subgroup_embedding(dihedral, [0, 3, 6, 9])
    x = random_element(embedding.sub, rng)
    pushed = push_forward(embedding, x)
    assert set(pushed.support().members) <= {0, 3, 6, 9}
    assert np.allclose(pull_back(embedding, pushed).coeffs, x.coeffs)


def test_indicator_and_support():
    V = parse_subset(dihedral, "indices:0,1,5,7")
    assert indicator(V).support().members == V.members
    assert zero(dihedral).support().size == 0
    restricted = random_element(dihedral, rng, support=(0, 1, 2))
    assert set(restricted.support().members) <= {0, 1, 2}


def test_arithmetic():
    f = random_element(dihedral, rng)
    assert np.allclose((f - f).coeffs, 0)
    assert np.allclose((2 * f + (-f)).coeffs, f.coeffs)


def test_ParentMismatchError():
    with pytest.raises(ParentMismatchError):
        convolve(delta(dihedral, 0), delta(heisenberg, 0))
