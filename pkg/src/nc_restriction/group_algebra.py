"""
Group Algebra Module

Complex coefficient functions on a finite group, representing elements lambda(f) of the group
von Neumann algebra with counting Haar measure, together with convolution, the involution
f*(s) = conj(f(s^-1)) and the left regular representation.

"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nc_restriction.finite_groups import (
    FiniteGroup,
    GroupSubset,
    SubgroupEmbedding,
    require_same_group,
)

logger = logging.getLogger(__name__)


class InputLengthDoesNotMatchError(Exception):
    """Exception raised when a coefficient vector does not have one entry per group element"""


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """
    A coefficient function f on a finite group.

    Attributes:
        parent: the group the coefficients are indexed by.
        coeffs: complex vector of length parent.order.
    """

    parent: FiniteGroup
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.complex128)
        if coeffs.shape != (self.parent.order,):
            raise InputLengthDoesNotMatchError(
                f"Expected {self.parent.order} coefficients for {self.parent.label}, got shape {coeffs.shape}."
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def support(self, tolerance: float = 0.0) -> GroupSubset:
        """Elements with a coefficient of modulus above tolerance"""
        return GroupSubset(self.parent, tuple(np.flatnonzero(np.abs(self.coeffs) > tolerance).tolist()))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        require_same_group(self.parent, other.parent)
        return AlgebraElement(self.parent, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        require_same_group(self.parent, other.parent)
        return AlgebraElement(self.parent, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        return AlgebraElement(self.parent, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.parent, -self.coeffs)


def delta(group: FiniteGroup, s: int) -> AlgebraElement:
    """Point mass at s, i.e. lambda(s)"""
    coeffs = np.zeros(group.order, dtype=np.complex128)
    coeffs[s] = 1.0
    return AlgebraElement(group, coeffs)


def indicator(subset: GroupSubset) -> AlgebraElement:
    """The function 1_V"""
    return AlgebraElement(subset.parent, subset.mask().astype(np.complex128))


def zero(group: FiniteGroup) -> AlgebraElement:
    """The zero element"""
    return AlgebraElement(group, np.zeros(group.order, dtype=np.complex128))


def random_element(
    group: FiniteGroup, rng: np.random.Generator, support: Sequence[int] | None = None, real: bool = False
) -> AlgebraElement:
    """Complex (or real) Gaussian coefficients, optionally restricted to a support."""
    coeffs = rng.standard_normal(group.order).astype(np.complex128)
    if not real:
        coeffs = coeffs + 1j * rng.standard_normal(group.order)
    if support is not None:
        mask = np.zeros(group.order, dtype=bool)
        mask[list(support)] = True
        coeffs[~mask] = 0.0
    return AlgebraElement(group, coeffs)


def bincount_complex(index: np.ndarray, weights: np.ndarray, length: int) -> np.ndarray:
    """Sum complex weights into bins given by index."""
    index = index.ravel()
    weights = weights.ravel()
    return np.bincount(index, weights=weights.real, minlength=length) + 1j * np.bincount(
        index, weights=weights.imag, minlength=length
    )


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """
    Convolution (f * g)(s) = sum_t f(t) g(t^-1 s), so that lambda(f * g) = lambda(f) lambda(g).

    Raises:
        ParentMismatchError: f and g live on different groups.
    """
    require_same_group(f.parent, g.parent)
    group = f.parent
    return AlgebraElement(group, bincount_complex(group.mul, np.outer(f.coeffs, g.coeffs), group.order))


def convolve_all(elements: Sequence[AlgebraElement]) -> AlgebraElement:
    """Ordered product x_1 * x_2 * ... * x_k of a nonempty sequence"""
    product = elements[0]
    for element in elements[1:]:
        product = convolve(product, element)
    return product


def involution(f: AlgebraElement) -> AlgebraElement:
    """f*(s) = conj(f(s^-1)), the adjoint lambda(f)*"""
    return AlgebraElement(f.parent, np.conj(f.coeffs[f.parent.inv]))


def reflection(f: AlgebraElement) -> AlgebraElement:
    """f_check(s) = f(s^-1)"""
    return AlgebraElement(f.parent, f.coeffs[f.parent.inv])


def regular_matrix(f: AlgebraElement) -> np.ndarray:
    """Matrix of lambda(f) on l2(G): entry (t, u) equals f(t u^-1)."""
    group = f.parent
    return f.coeffs[group.mul[:, group.inv]]


def element_from_matrix(group: FiniteGroup, matrix: np.ndarray) -> AlgebraElement:
    """Coefficients of a matrix lying in lambda(C[G]), read off the identity column."""
    return AlgebraElement(group, np.asarray(matrix)[:, group.identity])


def pairing_coefficients(group: FiniteGroup, matrix: np.ndarray) -> AlgebraElement:
    """
    Adjoint of regular_matrix for the real pairing Re tr(G* A).

    Returns g with Re tr(G* regular_matrix(d)) = Re sum_s conj(g(s)) d(s) for every d.
    """
    return AlgebraElement(group, bincount_complex(group.mul[:, group.inv], np.asarray(matrix), group.order))


def push_forward(embedding: SubgroupEmbedding, x: AlgebraElement) -> AlgebraElement:
    """The element of C[amb] with the coefficients of x placed on the image of the subgroup"""
    require_same_group(embedding.sub, x.parent)
    coeffs = np.zeros(embedding.amb.order, dtype=np.complex128)
    coeffs[embedding.map] = x.coeffs
    return AlgebraElement(embedding.amb, coeffs)


def pull_back(embedding: SubgroupEmbedding, f: AlgebraElement) -> AlgebraElement:
    """Restriction of the coefficients of f to the subgroup (the trace preserving conditional expectation)"""
    require_same_group(embedding.amb, f.parent)
    return AlgebraElement(embedding.sub, f.coeffs[embedding.map])


def left_translate(r: int, f: AlgebraElement) -> AlgebraElement:
    """lambda(r) f"""
    return convolve(delta(f.parent, r), f)


def right_translate(f: AlgebraElement, t: int) -> AlgebraElement:
    """f lambda(t)"""
    return convolve(f, delta(f.parent, t))
