"""
Noncommutative Lp Module

Trace, Schatten type L_p norms, the duality pairing and polar data of the group von Neumann
algebra of a finite group. The trace is tau(lambda(f)) = f(e) = Tr / N on the regular
representation, so ||x||_p = ((1/N) sum_i sigma_i^p)^(1/p) over the singular values of the
N x N regular matrix.

"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from nc_restriction.finite_groups import EmptySubsetError, GroupSubset, NotSymmetricError, require_same_group
from nc_restriction.group_algebra import AlgebraElement, element_from_matrix, indicator, regular_matrix

logger = logging.getLogger(__name__)

INF = math.inf
ZERO_EIGENVALUE_TOLERANCE = 1e-12


class InvalidExponentError(Exception):
    """Exception raised when an exponent lies outside [1, inf]"""


class SingularValueError(Exception):
    """Exception raised when the singular value decomposition does not converge"""


def check_exponent(p: float) -> float:
    """Validate an exponent p in [1, inf] and return it as a float."""
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidExponentError(f"Exponent {p} is not in [1, inf].")
    return p


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1, with 1 and inf exchanged explicitly."""
    p = check_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def harmonic_exponent(*exponents: float) -> float:
    """p with 1/p = sum_i 1/p_i."""
    total = sum(0.0 if q == INF else 1.0 / check_exponent(q) for q in exponents)
    if total == 0:
        return INF
    if total > 1 + 1e-12:
        raise InvalidExponentError(f"1/p = {total} exceeds 1 for exponents {exponents}.")
    return 1.0 / total


def singular_values(matrix: np.ndarray) -> np.ndarray:
    """Singular values in decreasing order."""
    try:
        return scipy.linalg.svdvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as error:
        raise SingularValueError(f"SVD failed for a {np.shape(matrix)} matrix: {error}") from error


def schatten_norm(matrix: np.ndarray, p: float, normalisation: float = 1.0) -> float:
    """
    Normalised Schatten norm ((1/normalisation) sum_i sigma_i^p)^(1/p); the largest singular value at p = inf.

    Args:
        matrix (np.ndarray): any complex matrix.
        p (float): exponent in [1, inf].
        normalisation (float): trace normalisation, N for the regular representation of a group of order N.
    """
    p = check_exponent(p)
    sigma = singular_values(matrix)
    if p == INF:
        return float(sigma[0]) if sigma.size else 0.0
    top = float(sigma[0]) if sigma.size else 0.0
    if top == 0.0:
        return 0.0
    # scaled to avoid overflow for large exponents
    return top * float((np.sum((sigma / top) ** p) / normalisation) ** (1.0 / p))


def lp_norm(f: AlgebraElement, p: float) -> float:
    """||lambda(f)||_p for the trace tau(lambda(f)) = f(e)."""
    return schatten_norm(regular_matrix(f), p, f.parent.order)


def l2_norm(f: AlgebraElement) -> float:
    """||lambda(f)||_2, equal to the l2 norm of the coefficients by the Plancherel identity."""
    return float(np.linalg.norm(f.coeffs))


def quotient_lp_norm(f: AlgebraElement, p: float, kernel_order: int) -> float:
    """L_p norm on a quotient group whose Haar measure gives every coset mass kernel_order."""
    p = check_exponent(p)
    if p == INF:
        return lp_norm(f, p)
    return lp_norm(f, p) * kernel_order ** (-1.0 / p)


def plancherel_trace(f: AlgebraElement) -> complex:
    """tau(lambda(f)) = f(e)"""
    return complex(f.coeffs[f.parent.identity])


def dual_pairing(phi: AlgebraElement, f: AlgebraElement) -> complex:
    """<lambda(phi_check), lambda(f)> = sum_s phi(s) f(s)."""
    require_same_group(phi.parent, f.parent)
    return complex(np.sum(phi.coeffs * f.coeffs))


def abs_power(f: AlgebraElement, s: float) -> AlgebraElement:
    """
    The element |lambda(f)|^s, computed by functional calculus on lambda(f)* lambda(f).

    Args:
        f (AlgebraElement): the element x.
        s (float): positive power.
    """
    if s <= 0:
        raise InvalidExponentError(f"abs_power needs a positive power, got {s}.")
    matrix = regular_matrix(f)
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix.conj().T @ matrix)
    powers = np.clip(eigenvalues, 0.0, None) ** (s / 2.0)
    return element_from_matrix(f.parent, (eigenvectors * powers) @ eigenvectors.conj().T)


@dataclass(frozen=True, eq=False)
class PolarPair:
    """
    Polar decomposition k_V = u h of k_V = |V|^(-1/2) lambda(1_V).

    Attributes:
        h: positive semidefinite part.
        u: self-adjoint partial isometry commuting with h.
        source: the symmetric set V.
        eigenvalues: eigenvalues of k_V.
        eigenvectors: orthonormal eigenvectors of k_V (columns).
    """

    h: np.ndarray
    u: np.ndarray
    source: GroupSubset
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def k(self) -> np.ndarray:
        """The matrix of k_V"""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def polar_parts(subset: GroupSubset) -> PolarPair:
    """
    Polar parts of k_V for a symmetric nonempty V.

    Raises:
        EmptySubsetError: V is empty.
        NotSymmetricError: V is not closed under inverses.
    """
    # 1. check that V is a symmetric nonempty set
    if subset.size == 0:
        raise EmptySubsetError("polar_parts needs a nonempty set V.")
    if not subset.is_symmetric:
        raise NotSymmetricError(f"V = {subset.members} is not symmetric.")

    # 2. k_V is self-adjoint, so an eigendecomposition gives both polar parts
    k = regular_matrix(indicator(subset)) / math.sqrt(subset.size)
    eigenvalues, eigenvectors = scipy.linalg.eigh(k)
    scale = max(float(np.max(np.abs(eigenvalues))), 1.0)
    signs = np.where(np.abs(eigenvalues) <= ZERO_EIGENVALUE_TOLERANCE * scale, 0.0, np.sign(eigenvalues))
    magnitudes = np.abs(eigenvalues) * np.abs(signs)
    h = (eigenvectors * magnitudes) @ eigenvectors.conj().T
    u = (eigenvectors * signs) @ eigenvectors.conj().T
    return PolarPair(h, u, subset, eigenvalues * np.abs(signs), eigenvectors)


def polar_power(pair: PolarPair, s: float) -> np.ndarray:
    """h_V^s on the support of h_V; s = 0 gives the identity so that the p = inf map is x -> x."""
    if s == 0:
        return np.eye(pair.h.shape[0], dtype=np.complex128)
    magnitudes = np.abs(pair.eigenvalues)
    powers = np.where(magnitudes > 0, magnitudes, 1.0) ** s * (magnitudes > 0)
    return (pair.eigenvectors * powers) @ pair.eigenvectors.conj().T


def holder_witness(x: AlgebraElement, p: float, q: float) -> AlgebraElement:
    """y = |x|^(p/q), the element attaining ||x y||_r = ||x||_p ||y||_q for 1/r = 1/p + 1/q."""
    return abs_power(x, check_exponent(p) / check_exponent(q))
