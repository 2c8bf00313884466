"""
Lie Geometry Module

Matrix models of sl(n, R) and of the three dimensional Heisenberg algebra: structure constants,
adjoint operators, the adjoint ball {g : ||Ad_g|| <= rho} and its KAK description, the density of
the Haar measure in exponential coordinates, nilpotent orbit dimensions, minimal orbit norms and the
tube around the nilpotent cone {x : inf ||Ad_g x|| < eps, ||x|| < R}.

Norms use the inner product B(x, y) = trace(x y^T); closed forms are given for sl(2, R).

"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.optimize
from scipy.stats import special_ortho_group

logger = logging.getLogger(__name__)

MAX_SL_SIZE = 5
RANK_CUTOFF = 1e-8
NILPOTENT_TOLERANCE = 1e-9
DETERMINANT_TOLERANCE = 1e-9
ROUNDTRIP_TOLERANCE = 1e-8
TAYLOR_THRESHOLD = 1e-3
SERIES_TERMS = 30
MIN_SERIES_TERMS = 8
DESCENT_STARTS = 20
DESCENT_BOUND = 12.0


class UnsupportedModelError(Exception):
    """Exception raised when a Lie model name is unknown or an operation does not support the model"""


class SingularMatrixError(Exception):
    """Exception raised when a group matrix is not invertible or has the wrong determinant"""


class NotNilpotentError(Exception):
    """Exception raised when an algebra element is not nilpotent"""


class InvalidRadiusError(Exception):
    """Exception raised when a radius or adjoint-ball parameter is out of range"""


class NotInGroupError(Exception):
    """Exception raised when a matrix does not belong to the group of the model"""


class NilpotentDominanceError(Exception):
    """Exception raised when a random nilpotent has a larger orbit than the regular nilpotent"""


class SeriesTermsError(Exception):
    """Exception raised when too few series terms are requested for the exponential density"""


class LogMapError(Exception):
    """Exception raised when the matrix logarithm fails its exp/log roundtrip"""


@dataclass(frozen=True, eq=False)
class LieModel:
    """
    A matrix Lie algebra with a fixed basis.

    Attributes:
        name: "sl:n" or "heisenberg3".
        size: matrix size n.
        basis: array (dim, n, n) of basis matrices.
        structure: c[i, j, k] with [b_i, b_j] = sum_k c[i, j, k] b_k.
        gram: inner products trace(b_i b_j^T).
        frame: basis coordinates of a B-orthonormal frame (columns).
        reductive: True for sl(n).
    """

    name: str
    size: int
    basis: np.ndarray
    structure: np.ndarray
    gram: np.ndarray
    frame: np.ndarray
    reductive: bool

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @functools.cached_property
    def decoder(self) -> np.ndarray:
        """Linear map from flattened matrices to basis coordinates"""
        return np.linalg.pinv(self.basis.reshape(self.dim, -1).T)

    @functools.cached_property
    def coframe(self) -> np.ndarray:
        """Inverse of frame: basis coordinates to orthonormal coordinates"""
        return np.linalg.inv(self.frame)

    def to_matrix(self, coords: np.ndarray) -> np.ndarray:
        """Matrices of one or many coordinate vectors (last axis = dim)"""
        return np.tensordot(np.asarray(coords, dtype=float), self.basis, axes=([-1], [0]))

    def to_coords(self, matrices: np.ndarray) -> np.ndarray:
        """Basis coordinates of one or many matrices (last two axes = n x n)"""
        flat = np.asarray(matrices, dtype=float).reshape(*np.shape(matrices)[:-2], -1)
        return flat @ self.decoder.T

    def from_orthonormal(self, points: np.ndarray) -> np.ndarray:
        """Basis coordinates of points given in orthonormal coordinates"""
        return np.asarray(points, dtype=float) @ self.frame.T

    def to_orthonormal(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.coframe.T

    def cartan_involution(self, coords: np.ndarray) -> np.ndarray | None:
        """theta(x) = -x^T on sl(n); None for the Heisenberg algebra."""
        if not self.reductive:
            return None
        return self.to_coords(-np.swapaxes(self.to_matrix(coords), -1, -2))

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        """B(x, y) = trace(x y^T) on coordinates"""
        return float(np.asarray(x) @ self.gram @ np.asarray(y))


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    """An element of the Lie algebra in basis coordinates."""

    model: LieModel
    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=float)
        if coords.shape != (self.model.dim,) or not np.all(np.isfinite(coords)):
            raise UnsupportedModelError(f"Expected {self.model.dim} finite coordinates, got {coords}.")
        object.__setattr__(self, "coords", coords)

    @property
    def matrix(self) -> np.ndarray:
        return self.model.to_matrix(self.coords)

    @property
    def norm(self) -> float:
        """B-norm, the Frobenius norm of the matrix"""
        return float(np.linalg.norm(self.matrix))

    @classmethod
    def from_matrix(cls, model: LieModel, matrix: np.ndarray) -> "AlgebraVector":
        return cls(model, model.to_coords(matrix))


@dataclass(frozen=True, eq=False)
class GroupMatrix:
    """An element of SL(n, R) or of the unipotent Heisenberg group."""

    model: LieModel
    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.mat, dtype=float)
        n = self.model.size
        if mat.shape != (n, n):
            raise NotInGroupError(f"Expected a {n} x {n} matrix, got shape {mat.shape}.")
        if self.model.reductive:
            if abs(np.linalg.det(mat) - 1.0) > DETERMINANT_TOLERANCE:
                raise NotInGroupError(f"det = {np.linalg.det(mat)} is not 1.")
        elif not np.allclose(np.tril(mat), np.eye(n), atol=1e-12):
            raise NotInGroupError("Heisenberg group elements are unit upper triangular.")
        object.__setattr__(self, "mat", mat)

    def inverse(self) -> "GroupMatrix":
        try:
            return GroupMatrix(self.model, np.linalg.inv(self.mat))
        except np.linalg.LinAlgError as error:
            raise SingularMatrixError("The group matrix is singular.") from error

    def __matmul__(self, other: "GroupMatrix") -> "GroupMatrix":
        return GroupMatrix(self.model, self.mat @ other.mat)


####################
# MODELS           #
####################


def _unit(n: int, i: int, j: int) -> np.ndarray:
    matrix = np.zeros((n, n))
    matrix[i, j] = 1.0
    return matrix


def _sl_basis(n: int) -> np.ndarray:
    """H_i = E_ii - E_{i+1,i+1}, then E_ij for i < j, then E_ij for i > j."""
    cartan = [_unit(n, i, i) - _unit(n, i + 1, i + 1) for i in range(n - 1)]
    upper = [_unit(n, i, j) for i in range(n) for j in range(i + 1, n)]
    lower = [_unit(n, i, j) for i in range(n) for j in range(i)]
    return np.array(cartan + upper + lower)


def _heisenberg_basis() -> np.ndarray:
    """X = E_12, Y = E_23, Z = E_13"""
    return np.array([_unit(3, 0, 1), _unit(3, 1, 2), _unit(3, 0, 2)])


def _assemble(name: str, basis: np.ndarray, reductive: bool) -> LieModel:
    dim, n, _ = basis.shape
    decoder = np.linalg.pinv(basis.reshape(dim, -1).T)
    brackets = np.einsum("iab,jbc->ijac", basis, basis) - np.einsum("jab,ibc->ijac", basis, basis)
    structure = brackets.reshape(dim, dim, -1) @ decoder.T
    gram = np.einsum("iab,jab->ij", basis, basis)
    cholesky = np.linalg.cholesky(gram)
    frame = np.linalg.inv(cholesky).T
    return LieModel(name, n, basis, structure, gram, frame, reductive)


@functools.lru_cache(maxsize=16)
def build_model(name: str) -> LieModel:
    """
    Build a Lie model by name.

    Args:
        name (str): "sl:n" with 2 <= n <= 5, or "heisenberg3".

    Raises:
        UnsupportedModelError: unknown name or n out of range.
    """
    name = name.strip()
    if name == "heisenberg3":
        return _assemble(name, _heisenberg_basis(), reductive=False)
    kind, _, argument = name.partition(":")
    if kind != "sl":
        raise UnsupportedModelError(f"Unknown Lie model '{name}'.")
    try:
        n = int(argument)
    except ValueError as error:
        raise UnsupportedModelError(f"Cannot parse the matrix size of '{name}'.") from error
    if not 2 <= n <= MAX_SL_SIZE:
        raise UnsupportedModelError(f"sl:{n} is outside the supported range 2..{MAX_SL_SIZE}.")
    model = _assemble(f"sl:{n}", _sl_basis(n), reductive=True)
    logger.debug("built %s of dimension %d", model.name, model.dim)
    return model


def jacobi_residual(model: LieModel) -> float:
    """Largest violation of antisymmetry and of the Jacobi identity on basis triples."""
    c = model.structure
    antisymmetry = np.max(np.abs(c + np.swapaxes(c, 0, 1)))
    jacobi = (
        np.einsum("jkl,ilm->ijkm", c, c) + np.einsum("kil,jlm->ijkm", c, c) + np.einsum("ijl,klm->ijkm", c, c)
    )
    return float(max(antisymmetry, np.max(np.abs(jacobi))))


def bracket(x: AlgebraVector, y: AlgebraVector) -> AlgebraVector:
    return AlgebraVector(x.model, np.einsum("i,j,ijk->k", x.coords, y.coords, x.model.structure))


def ad_operator(x: AlgebraVector) -> np.ndarray:
    """Matrix of y -> [x, y] in basis coordinates."""
    return np.einsum("i,ijk->kj", x.coords, x.model.structure)


def adjoint_action(g: GroupMatrix, x: AlgebraVector) -> AlgebraVector:
    """Ad_g x = g x g^-1"""
    return AlgebraVector.from_matrix(x.model, g.mat @ x.matrix @ g.inverse().mat)


def adjoint_matrix(g: GroupMatrix) -> np.ndarray:
    """Ad_g in orthonormal coordinates"""
    model = g.model
    inverse = g.inverse().mat
    images = np.einsum("ab,ibc,cd->iad", g.mat, model.basis, inverse)
    in_basis = model.to_coords(images).T
    return model.coframe @ in_basis @ model.frame


def adjoint_norm(g: GroupMatrix) -> float:
    """
    Operator norm of Ad_g for the B-inner product.

    Raises:
        SingularMatrixError: g is not invertible.
    """
    return float(scipy.linalg.svdvals(adjoint_matrix(g))[0])


####################
# ADJOINT BALLS    #
####################


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar random element of SO(n)"""
    if n == 1:
        return np.ones((1, 1))
    return special_ortho_group.rvs(n, random_state=rng)


def random_sl_element(model: LieModel, rng: np.random.Generator, max_log: float = 1.0) -> GroupMatrix:
    """
    k_1 exp(h) k_2 with Haar rotations and a traceless diagonal h with entries up to max_log in size;
    exp of a random algebra element for the Heisenberg model.
    """
    if not model.reductive:
        x = AlgebraVector(model, rng.uniform(-max_log, max_log, size=model.dim))
        return exp_map(x)
    n = model.size
    h = rng.uniform(-max_log, max_log, size=n)
    h -= h.mean()
    middle = np.diag(np.exp(h))
    return GroupMatrix(model, random_rotation(n, rng) @ middle @ random_rotation(n, rng))


@dataclass(frozen=True)
class BallCheck:
    """Membership in the adjoint ball with the inversion and K-invariance residuals."""

    rho: float
    norm: float
    member: bool
    inverse_residual: float
    rotation_residual: float

    @property
    def passed(self) -> bool:
        return self.inverse_residual <= 1e-9 and self.rotation_residual <= 1e-8


def ball_checks(g: GroupMatrix, rho: float, rng: np.random.Generator | None = None) -> BallCheck:
    """
    Membership of g in B_rho = {g : ||Ad_g|| <= rho} and the invariance of the adjoint norm under inversion
    and under multiplication by rotations on both sides (relative residuals).

    Raises:
        InvalidRadiusError: rho < 1.
        UnsupportedModelError: the model is not sl(n).
    """
    if rho < 1:
        raise InvalidRadiusError(f"Adjoint balls need rho >= 1, got {rho}.")
    if not g.model.reductive:
        raise UnsupportedModelError("Adjoint balls are checked on sl(n) models.")
    rng = rng or np.random.default_rng(0)
    norm = adjoint_norm(g)
    inverse_residual = abs(adjoint_norm(g.inverse()) - norm) / norm
    n = g.model.size
    rotated = GroupMatrix(g.model, random_rotation(n, rng) @ g.mat @ random_rotation(n, rng))
    rotation_residual = abs(adjoint_norm(rotated) - norm) / norm
    return BallCheck(rho, norm, bool(norm <= rho * (1 + 1e-12)), inverse_residual, rotation_residual)


def kak_decomposition(g: GroupMatrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """g = k_1 a k_2 with rotations k_i of determinant 1 and a positive diagonal a with decreasing entries."""
    if not g.model.reductive:
        raise UnsupportedModelError("The KAK decomposition is defined for sl(n).")
    u, sigma, vh = np.linalg.svd(g.mat)
    if np.linalg.det(u) < 0:
        # det g = 1 forces det u = det vh, so one sign flip fixes both
        flip = np.ones(len(sigma))
        flip[-1] = -1.0
        u = u * flip
        vh = flip[:, None] * vh
    return u, np.diag(sigma), vh


@dataclass(frozen=True)
class KakProfile:
    """Log singular values h (decreasing) and the largest root value h_1 - h_n."""

    h: np.ndarray
    max_root: float
    adjoint_norm: float

    @property
    def root_residual(self) -> float:
        """|exp(max_root) - ||Ad_g||| / ||Ad_g||"""
        return abs(math.exp(self.max_root) - self.adjoint_norm) / self.adjoint_norm

    def in_polygon(self, rho: float) -> bool:
        """max_{i != j} (h_i - h_j) <= log rho"""
        return self.max_root <= math.log(rho) + 1e-12


def kak_log_profile(g: GroupMatrix) -> KakProfile:
    """Middle factor of the KAK decomposition in logarithmic coordinates."""
    _, a, _ = kak_decomposition(g)
    h = np.log(np.diag(a))
    return KakProfile(h, float(h[0] - h[-1]), adjoint_norm(g))


####################
# NILPOTENT ORBITS #
####################


def numerical_rank(matrix: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    sigma = scipy.linalg.svdvals(matrix)
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > cutoff * sigma[0]))


def is_nilpotent(x: AlgebraVector) -> bool:
    """X^n = 0 after scaling X to unit norm"""
    scale = np.linalg.norm(x.matrix)
    if scale == 0:
        return True
    power = np.linalg.matrix_power(x.matrix / scale, x.model.size)
    return bool(np.linalg.norm(power) <= NILPOTENT_TOLERANCE)


def nilpotent_orbit_dim(x: AlgebraVector) -> int:
    """
    Dimension of the adjoint orbit of a nilpotent X, the rank of ad_X.

    Raises:
        NotNilpotentError: X is not nilpotent.
    """
    if not is_nilpotent(x):
        raise NotNilpotentError("The orbit dimension is computed for nilpotent elements only.")
    return numerical_rank(ad_operator(x))


def centralizer_dim(x: AlgebraVector) -> int:
    """dim g - rank ad_X"""
    return x.model.dim - numerical_rank(ad_operator(x))


def regular_nilpotent(model: LieModel) -> AlgebraVector:
    """The single Jordan block sum_i E_{i,i+1}"""
    if not model.reductive:
        raise UnsupportedModelError("The regular nilpotent is defined for sl(n).")
    n = model.size
    return AlgebraVector.from_matrix(model, np.eye(n, k=1))


@dataclass(frozen=True)
class NilpotentDimension:
    """Maximal nilpotent orbit dimension d with the random sweep that backs it."""

    model: str
    d: int | None
    sweep_max: int
    samples: int
    note: str = ""


def max_nilpotent_dim(model: LieModel, samples: int = 1000, seed: int = 0) -> NilpotentDimension:
    """
    Rank of ad for the regular nilpotent, checked to dominate random nilpotents g N g^-1 with N strictly upper
    triangular. The Heisenberg algebra is not reductive and gets d = None.

    Raises:
        NilpotentDominanceError: a random nilpotent exceeds the regular value.
    """
    if not model.reductive:
        return NilpotentDimension(model.name, None, 0, 0, "not applicable: the Heisenberg algebra is nilpotent")
    regular = nilpotent_orbit_dim(regular_nilpotent(model))
    rng = np.random.default_rng(seed)
    n = model.size
    sweep_max = 0
    for _ in range(samples):
        upper = np.triu(rng.standard_normal((n, n)), k=1)
        g = random_sl_element(model, rng, max_log=0.5)
        x = AlgebraVector.from_matrix(model, g.mat @ upper @ g.inverse().mat)
        sweep_max = max(sweep_max, numerical_rank(ad_operator(x)))
    if sweep_max > regular:
        raise NilpotentDominanceError(f"A random nilpotent has orbit dimension {sweep_max} > {regular}.")
    logger.info("%s: maximal nilpotent orbit dimension %d", model.name, regular)
    return NilpotentDimension(model.name, regular, sweep_max, samples)


def split_rank_formula(model: LieModel) -> int:
    """dim g - rank g, equal to n^2 - n for sl(n)"""
    if not model.reductive:
        raise UnsupportedModelError("The rank formula applies to sl(n).")
    return model.dim - (model.size - 1)


####################
# EXPONENTIAL MAP  #
####################


def _sl2_coefficients(q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """C, S with exp(X) = C I + S X for X^2 = q I."""
    root = np.sqrt(np.abs(q))
    small = root < TAYLOR_THRESHOLD
    safe = np.where(small, 1.0, root)
    hyperbolic = q > 0
    c = np.where(hyperbolic, np.cosh(root), np.cos(root))
    s = np.where(hyperbolic, np.sinh(safe) / safe, np.sin(safe) / safe)
    c = np.where(small, 1.0 + q / 2.0 + q**2 / 24.0, c)
    s = np.where(small, 1.0 + q / 6.0 + q**2 / 120.0, s)
    return c, s


def sl2_exp(x: np.ndarray) -> np.ndarray:
    """exp of one or many 2 x 2 traceless matrices"""
    x = np.asarray(x, dtype=float)
    q = -np.linalg.det(x)
    c, s = _sl2_coefficients(q)
    return c[..., None, None] * np.eye(2) + s[..., None, None] * x


def sl2_log(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Principal logarithm of one or many SL(2, R) matrices.

    Returns:
        (logs, ok): ok is False where trace(g) / 2 <= -1 + 1e-9 or the roundtrip residual exceeds 1e-8.
    """
    g = np.asarray(g, dtype=float)
    half = np.trace(g, axis1=-2, axis2=-1) / 2.0
    ok = half > -1.0 + 1e-9
    clipped = np.where(ok, half, 0.0)
    hyperbolic = clipped > 1.0
    theta = np.where(hyperbolic, np.arccosh(np.maximum(clipped, 1.0)), np.arccos(np.clip(clipped, -1.0, 1.0)))
    sine = np.where(hyperbolic, np.sinh(theta), np.sin(theta))
    near_identity = np.abs(clipped - 1.0) < 1e-8
    factor = np.where(near_identity, 1.0 - (clipped - 1.0) / 3.0, theta / np.where(near_identity, 1.0, sine))
    logs = factor[..., None, None] * (g - clipped[..., None, None] * np.eye(2))
    residual = np.linalg.norm(sl2_exp(logs) - g, axis=(-2, -1))
    ok &= residual <= ROUNDTRIP_TOLERANCE * np.maximum(1.0, np.linalg.norm(g, axis=(-2, -1)))
    return logs, ok


def sl2_density(x: np.ndarray) -> np.ndarray:
    """nu(X) = (sinh l / l)^2 with l^2 = -det X, (sin l / l)^2 for elliptic X"""
    q = -np.linalg.det(np.asarray(x, dtype=float))
    root = np.sqrt(np.abs(q))
    safe = np.where(root < TAYLOR_THRESHOLD, 1.0, root)
    value = np.where(q > 0, np.sinh(safe) / safe, np.sin(safe) / safe) ** 2
    return np.where(root < TAYLOR_THRESHOLD, 1.0 + q / 3.0 + 2.0 * q**2 / 45.0, value)


def exp_map(x: AlgebraVector) -> GroupMatrix:
    if x.model.name == "sl:2":
        return GroupMatrix(x.model, sl2_exp(x.matrix))
    return GroupMatrix(x.model, scipy.linalg.expm(x.matrix))


def log_map(g: GroupMatrix) -> AlgebraVector:
    """
    Principal logarithm.

    Raises:
        LogMapError: no real principal logarithm or the exp/log roundtrip residual exceeds 1e-8.
    """
    if g.model.name == "sl:2":
        logs, ok = sl2_log(g.mat)
        if not ok:
            raise LogMapError("No principal logarithm in sl(2).")
        return AlgebraVector.from_matrix(g.model, logs)
    logarithm = scipy.linalg.logm(g.mat)
    if np.max(np.abs(np.imag(logarithm))) > ROUNDTRIP_TOLERANCE:
        raise LogMapError("The principal logarithm is not real.")
    logarithm = np.real(logarithm)
    if np.linalg.norm(scipy.linalg.expm(logarithm) - g.mat) > ROUNDTRIP_TOLERANCE * max(1.0, np.linalg.norm(g.mat)):
        raise LogMapError("The exp/log roundtrip residual exceeds the tolerance.")
    return AlgebraVector.from_matrix(g.model, logarithm)


def _phi_factor(mu: np.ndarray) -> np.ndarray:
    """(1 - e^-mu) / mu with its Taylor expansion near 0"""
    small = np.abs(mu) < TAYLOR_THRESHOLD
    safe = np.where(small, 1.0, mu)
    taylor = 1.0 - mu / 2.0 + mu**2 / 6.0 - mu**3 / 24.0 + mu**4 / 120.0
    return np.where(small, taylor, (1.0 - np.exp(-safe)) / safe)


def exp_density(x: AlgebraVector, series_terms: int = SERIES_TERMS, method: str = "eigen") -> float:
    """
    Density nu(x) = |det((Id - exp(-ad_x)) / ad_x)| of the Haar measure in exponential coordinates.

    Args:
        x (AlgebraVector): the point.
        series_terms (int): terms of the series sum_k (-ad_x)^k / (k + 1)!, at least 8.
        method (str): "eigen" for the product over eigenvalues of ad_x, "series" for the truncated series.
            The series switches to the eigenvalue product when ||ad_x|| > pi.

    Raises:
        SeriesTermsError: series_terms < 8.
    """
    if series_terms < MIN_SERIES_TERMS:
        raise SeriesTermsError(f"At least {MIN_SERIES_TERMS} series terms are needed, got {series_terms}.")
    if method not in ("eigen", "series"):
        raise ValueError(f"Unknown density method '{method}'.")
    if not x.model.reductive:
        # ad_x is nilpotent
        return 1.0
    ad = ad_operator(x)
    if not np.any(ad):
        return 1.0
    if method == "series":
        if np.linalg.norm(ad, 2) > math.pi:
            logger.warning("||ad_x|| exceeds pi, using the eigenvalue product for the density")
        else:
            total = np.eye(x.model.dim)
            term = np.eye(x.model.dim)
            for k in range(1, series_terms + 1):
                term = term @ (-ad) / (k + 1)
                total = total + term
            return float(abs(np.linalg.det(total)))
    mu = scipy.linalg.eigvals(ad)
    return float(abs(np.prod(_phi_factor(mu))))


####################
# ORBIT NORMS      #
####################


@functools.lru_cache(maxsize=8)
def _symmetric_basis(n: int) -> np.ndarray:
    """Orthonormal basis of symmetric traceless n x n matrices"""
    elements = []
    for i in range(n - 1):
        diagonal = np.zeros(n)
        diagonal[: i + 1] = 1.0
        diagonal[i + 1] = -(i + 1)
        elements.append(np.diag(diagonal / np.linalg.norm(diagonal)))
    for i in range(n):
        for j in range(i + 1, n):
            elements.append((_unit(n, i, j) + _unit(n, j, i)) / math.sqrt(2.0))
    return np.array(elements)


def _conjugated_log_norm(coefficients: np.ndarray, basis: np.ndarray, x: np.ndarray) -> float:
    p = np.tensordot(coefficients, basis, axes=1)
    w, q = np.linalg.eigh(p)
    conjugated = (q * np.exp(w)) @ q.T @ x @ (q * np.exp(-w)) @ q.T
    return 0.5 * math.log(max(float(np.sum(conjugated**2)), 1e-300))


def orbit_min_norm(x: AlgebraVector, method: str = "closed", starts: int = DESCENT_STARTS, seed: int = 0) -> float:
    """
    inf over g of ||g x g^-1||.

    Args:
        x (AlgebraVector): the element.
        method (str): "closed" for sqrt(2 |det x|) on sl(2), "descent" for L-BFGS over exp(P) with P symmetric
            traceless from several random starts.
        starts (int): number of descent starts.
        seed (int): seed of the starts.

    Raises:
        UnsupportedModelError: closed form outside sl(2) or any method on a non-reductive model.
    """
    model = x.model
    if not model.reductive:
        raise UnsupportedModelError("Orbit norms are computed on sl(n).")
    if method == "closed":
        if model.name != "sl:2":
            raise UnsupportedModelError("The closed form is available on sl(2) only.")
        return math.sqrt(2.0 * abs(np.linalg.det(x.matrix)))
    if method != "descent":
        raise ValueError(f"Unknown orbit norm method '{method}'.")
    if x.norm == 0:
        return 0.0

    basis = _symmetric_basis(model.size)
    rng = np.random.default_rng(seed)
    bounds = [(-DESCENT_BOUND, DESCENT_BOUND)] * basis.shape[0]
    best = math.inf
    converged = False
    for _ in range(starts):
        start = rng.uniform(-1.0, 1.0, size=basis.shape[0])
        result = scipy.optimize.minimize(
            _conjugated_log_norm, start, args=(basis, x.matrix), method="L-BFGS-B", bounds=bounds
        )
        converged |= bool(result.success)
        best = min(best, float(result.fun))
    if not converged:
        logger.warning("Orbit norm descent did not converge from any of %d starts", starts)
    return math.exp(best)


def nilcone_tube_membership(x: AlgebraVector, eps: float, R: float, method: str | None = None) -> bool:
    """
    x lies in the tube Ad_G(B_eps) cap B_R around the nilpotent cone.

    Raises:
        InvalidRadiusError: eps or R not positive.
    """
    if eps <= 0 or R <= 0:
        raise InvalidRadiusError(f"Tube radii must be positive, got eps = {eps}, R = {R}.")
    method = method or ("closed" if x.model.name == "sl:2" else "descent")
    return bool(x.norm < R and orbit_min_norm(x, method) < eps)


def sl2_tube_mask(points: np.ndarray, eps: float, R: float) -> np.ndarray:
    """
    Vectorised tube membership on sl(2) for points in orthonormal coordinates (sqrt(2) h, e, f).
    """
    if eps <= 0 or R <= 0:
        raise InvalidRadiusError(f"Tube radii must be positive, got eps = {eps}, R = {R}.")
    points = np.asarray(points, dtype=float)
    h = points[..., 0] / math.sqrt(2.0)
    determinant = -(h**2) - points[..., 1] * points[..., 2]
    norm_squared = np.sum(points**2, axis=-1)
    return (norm_squared < R**2) & (2.0 * np.abs(determinant) < eps**2)


def sl2_tube_volume(eps: float, R: float) -> float:
    """
    Exact Lebesgue volume of the sl(2) tube in orthonormal coordinates.

    R^3 sqrt(2) pi [(2/3)((1 + t^2)^(3/2) - (1 - t^2)^(3/2)) - (2 sqrt(2) / 3) t^3] with t = eps / R; the
    whole ball 4 pi R^3 / 3 once eps >= R.
    """
    if eps <= 0 or R <= 0:
        raise InvalidRadiusError(f"Tube radii must be positive, got eps = {eps}, R = {R}.")
    t = eps / R
    if t >= 1:
        return 4.0 * math.pi * R**3 / 3.0
    bracket_value = (2.0 / 3.0) * ((1 + t**2) ** 1.5 - (1 - t**2) ** 1.5) - (2.0 * math.sqrt(2.0) / 3.0) * t**3
    return R**3 * math.sqrt(2.0) * math.pi * bracket_value


####################
# FILES            #
####################


def load_vectors_csv(model: LieModel, path: str) -> List[AlgebraVector]:
    """Rows of basis coordinates in columns x0 .. x{dim-1}"""
    frame = pd.read_csv(path)
    columns = [f"x{i}" for i in range(model.dim)]
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise UnsupportedModelError(f"{path} misses the coordinate columns {missing} for {model.name}.")
    return [AlgebraVector(model, row) for row in frame[columns].to_numpy(dtype=float)]


def load_group_matrices_csv(model: LieModel, path: str) -> List[GroupMatrix]:
    """Rows of matrix entries in columns m00, m01, ... (row major)"""
    frame = pd.read_csv(path)
    n = model.size
    columns = [f"m{i}{j}" for i in range(n) for j in range(n)]
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise NotInGroupError(f"{path} misses the matrix columns {missing} for {model.name}.")
    return [GroupMatrix(model, row.reshape(n, n)) for row in frame[columns].to_numpy(dtype=float)]
