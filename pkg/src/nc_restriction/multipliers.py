"""
Multipliers Module

Linear and multilinear Fourier multipliers on finite groups

    T_m(lambda(f_1), ..., lambda(f_n)) = sum_{s_1..s_n} m(s_1, ..., s_n) f_1(s_1) ... f_n(s_n) lambda(s_1 ... s_n),

the reduction identities relating multipliers of different arity (consummation, translation and
nested composition), restriction of symbols to subgroups and the bilinear Schur multiplier
compressed to Folner sets of a cyclic group.

"""

import functools
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from nc_restriction.finite_groups import (
    FiniteGroup,
    ParentMismatchError,
    SubgroupEmbedding,
    parse_subset,
    require_same_group,
    word_lengths,
)
from nc_restriction.group_algebra import (
    AlgebraElement,
    bincount_complex,
    convolve,
    convolve_all,
    delta,
    random_element,
    regular_matrix,
)
from nc_restriction.noncommutative_lp import (
    INF,
    InvalidExponentError,
    check_exponent,
    conjugate_exponent,
    harmonic_exponent,
    l2_norm,
    lp_norm,
)

logger = logging.getLogger(__name__)

MAX_SYMBOL_ENTRIES = 2**24


class ArityMismatchError(Exception):
    """Exception raised when the number of inputs does not match the arity of a symbol"""


class SymbolSizeError(Exception):
    """Exception raised when a symbol table has the wrong shape or is too large"""


class NonFiniteSymbolError(Exception):
    """Exception raised when a symbol contains NaN or infinite values"""


class InvalidIndexPatternError(Exception):
    """Exception raised when the slot indices of a reduction identity are invalid"""


class FolnerRadiusError(Exception):
    """Exception raised when the Folner radius is too large for the cyclic group"""


class MalformedSymbolSpecError(Exception):
    """Exception raised when a named symbol family cannot be parsed"""


@dataclass(frozen=True, eq=False)
class Symbol:
    """
    A dense symbol m on G^n.

    Attributes:
        parent: the group G.
        values: complex table of shape (N,) * n.
    """

    parent: FiniteGroup
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)
        order = self.parent.order
        # 1. shape G^n with n >= 1
        if values.ndim < 1 or any(size != order for size in values.shape):
            raise SymbolSizeError(f"Symbol table of shape {values.shape} does not match G^n for |G| = {order}.")
        # 2. dense size limit
        if values.size > MAX_SYMBOL_ENTRIES:
            raise SymbolSizeError(f"Symbol with {values.size} entries exceeds the limit of {MAX_SYMBOL_ENTRIES}.")
        # 3. finite values
        if not np.all(np.isfinite(values)):
            raise NonFiniteSymbolError("Symbol values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def arity(self) -> int:
        """Number of arguments n"""
        return self.values.ndim

    def __call__(self, *elements: int) -> complex:
        return complex(self.values[tuple(elements)])

    def reflect(self) -> "Symbol":
        """m_check(s) = m(s^-1) for a linear symbol"""
        if self.arity != 1:
            raise ArityMismatchError("Only linear symbols can be reflected.")
        return Symbol(self.parent, self.values[self.parent.inv])


####################
# SYMBOL FAMILIES  #
####################


def constant_symbol(group: FiniteGroup, arity: int, value: complex = 1.0) -> Symbol:
    """m = value on G^n"""
    return Symbol(group, np.full((group.order,) * arity, value, dtype=np.complex128))


def symbol_from_function(group: FiniteGroup, arity: int, function: Callable[..., np.ndarray]) -> Symbol:
    """Tabulate a vectorised function of n element-index grids."""
    grids = np.indices((group.order,) * arity, sparse=True)
    values = np.broadcast_to(function(*grids), (group.order,) * arity)
    return Symbol(group, values)


def random_symbol(group: FiniteGroup, arity: int, rng: np.random.Generator) -> Symbol:
    """Complex Gaussian entries"""
    shape = (group.order,) * arity
    return Symbol(group, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def positive_symbol(group: FiniteGroup, arity: int, rng: np.random.Generator) -> Symbol:
    """Real entries uniform in [0.5, 1.5]"""
    return Symbol(group, rng.uniform(0.5, 1.5, size=(group.order,) * arity))


def gaussian_symbol(group: FiniteGroup, arity: int, sigma: float) -> Symbol:
    """exp(-(|s_1|^2 + ... + |s_n|^2) / (2 sigma^2)) with |s| the word length."""
    lengths = word_lengths(group).astype(float)
    if np.any(lengths < 0):
        raise MalformedSymbolSpecError(f"{group.label} is not generated by its listed generators.")
    profile = np.exp(-(lengths**2) / (2.0 * sigma**2))
    return symbol_from_function(group, arity, lambda *grids: functools.reduce(np.multiply, [profile[g] for g in grids]))


def von_mises_symbol(group: FiniteGroup, arity: int, kappa: float) -> Symbol:
    """Smooth periodic profile exp(kappa (cos(2 pi s / N) - 1)) in every slot, indices read as residues mod N."""
    angles = 2.0 * np.pi * np.arange(group.order) / group.order
    profile = np.exp(kappa * (np.cos(angles) - 1.0))
    return symbol_from_function(group, arity, lambda *grids: functools.reduce(np.multiply, [profile[g] for g in grids]))


def indicator_symbol(group: FiniteGroup, arity: int, subset_spec: str) -> Symbol:
    """m(s_1, ..., s_n) = 1 when s_1 ... s_n lies in the subset."""
    mask = parse_subset(group, subset_spec).mask().astype(float)
    return Symbol(group, mask[product_table(group, arity)])


def parse_symbol(group: FiniteGroup, spec: str, arity: int = 1) -> Symbol:
    """
    Build a symbol from a named family.

    Args:
        group (FiniteGroup): the group G.
        spec (str): "constant:c", "gaussian:sigma", "vonmises:kappa", "indicator:<subset spec>",
            "random:seed" or "positive:seed".
        arity (int): number of arguments.
    """
    kind, _, argument = spec.strip().partition(":")
    try:
        if kind == "constant":
            return constant_symbol(group, arity, complex(argument or "1"))
        if kind == "gaussian":
            return gaussian_symbol(group, arity, float(argument))
        if kind == "vonmises":
            return von_mises_symbol(group, arity, float(argument))
        if kind == "indicator":
            return indicator_symbol(group, arity, argument)
        if kind == "random":
            return random_symbol(group, arity, np.random.default_rng(int(argument)))
        if kind == "positive":
            return positive_symbol(group, arity, np.random.default_rng(int(argument)))
    except ValueError as error:
        raise MalformedSymbolSpecError(f"Cannot parse symbol '{spec}'.") from error
    raise MalformedSymbolSpecError(f"Unknown symbol family '{kind}' in '{spec}'.")


def load_symbol_csv(group: FiniteGroup, path: str) -> Symbol:
    """Read a symbol from CSV columns s1..sn, re, im; missing entries are zero."""
    frame = pd.read_csv(path)
    slots = [column for column in frame.columns if column.startswith("s")]
    if not slots:
        raise MalformedSymbolSpecError(f"{path} has no element index columns s1..sn.")
    values = np.zeros((group.order,) * len(slots), dtype=np.complex128)
    index = tuple(frame[column].to_numpy(dtype=np.int64) for column in sorted(slots))
    imaginary = frame["im"].to_numpy(dtype=float) if "im" in frame.columns else 0.0
    values[index] = frame["re"].to_numpy(dtype=float) + 1j * imaginary
    return Symbol(group, values)


def symbol_to_frame(m: Symbol) -> pd.DataFrame:
    """CSV-ready table of the nonzero entries of a symbol"""
    index = np.nonzero(m.values)
    columns = {f"s{slot + 1}": index[slot] for slot in range(m.arity)}
    columns["re"] = m.values[index].real
    columns["im"] = m.values[index].imag
    return pd.DataFrame(columns)


####################
# APPLICATION      #
####################


@functools.lru_cache(maxsize=64)
def product_table(group: FiniteGroup, arity: int) -> np.ndarray:
    """Table of shape (N,) * arity holding the index of s_1 s_2 ... s_n."""
    table = np.arange(group.order)
    for _ in range(arity - 1):
        table = group.mul[table[..., None], np.arange(group.order)]
    table.setflags(write=False)
    return table


def _check_inputs(m: Symbol, inputs: Sequence[AlgebraElement]) -> None:
    if len(inputs) != m.arity:
        raise ArityMismatchError(f"Symbol of arity {m.arity} applied to {len(inputs)} inputs.")
    for element in inputs:
        require_same_group(m.parent, element.parent)


def apply_multiplier(m: Symbol, *inputs: AlgebraElement) -> AlgebraElement:
    """
    Apply T_m to the inputs.

    The coefficient of the output at r is sum over s_1 ... s_n = r of m(s_1, ..., s_n) f_1(s_1) ... f_n(s_n).

    Raises:
        ArityMismatchError: the number of inputs differs from the arity of m.
        ParentMismatchError: an input lives on another group.
    """
    _check_inputs(m, inputs)
    if m.arity == 1:
        return AlgebraElement(m.parent, m.values * inputs[0].coeffs)
    weights = functools.reduce(np.multiply.outer, [element.coeffs for element in inputs]) * m.values
    return AlgebraElement(m.parent, bincount_complex(product_table(m.parent, m.arity), weights, m.parent.order))


def slot_gradient(m: Symbol, inputs: Sequence[AlgebraElement], slot: int, output_gradient: np.ndarray) -> np.ndarray:
    """
    Gradient in slot i of the real functional Re <c, T_m(x_1, ..., x_n)>.

    Returns conj(v) with v(s_i) = sum over the other slots of conj(c(s_1 ... s_n)) m(s) prod_{j != i} x_j(s_j).
    """
    tensor = m.values * np.conj(output_gradient)[product_table(m.parent, m.arity)]
    for j in reversed(range(m.arity)):
        if j != slot:
            tensor = np.tensordot(tensor, inputs[j].coeffs, axes=([j], [0]))
    return np.conj(tensor)


def restrict_symbol(m: Symbol, embedding: SubgroupEmbedding) -> Symbol:
    """m restricted to H^n through the embedding H -> G."""
    if not (embedding.amb is m.parent or np.array_equal(embedding.amb.mul, m.parent.mul)):
        raise ParentMismatchError("The embedding does not land in the group of the symbol.")
    return Symbol(embedding.sub, m.values[np.ix_(*([embedding.map] * m.arity))])


def multiplier_ratio(m: Symbol, inputs: Sequence[AlgebraElement], exponents: Sequence[float], p: float) -> float:
    """||T_m(x_1, ..., x_n)||_p / prod_i ||x_i||_{p_i}, zero when an input vanishes."""
    denominator = float(np.prod([lp_norm(x, q) for x, q in zip(inputs, exponents)]))
    if denominator == 0:
        return 0.0
    return lp_norm(apply_multiplier(m, *inputs), p) / denominator


####################
# IDENTITIES       #
####################


def _grids(group: FiniteGroup, arity: int) -> List[np.ndarray]:
    return list(np.indices((group.order,) * arity, sparse=True))


def _block_product(group: FiniteGroup, grids: Sequence[np.ndarray]) -> np.ndarray:
    product = grids[0]
    for grid in grids[1:]:
        product = group.mul[product, grid]
    return product


def _blocks(indices: Sequence[int], n: int) -> List[Tuple[int, int]]:
    bounds = list(indices) + [n + 1]
    return [(bounds[j] - 1, bounds[j + 1] - 1) for j in range(len(indices))]


def _check_consummation(m: Symbol, indices: Sequence[int], n: int) -> None:
    if len(indices) != m.arity:
        raise InvalidIndexPatternError(f"{len(indices)} indices given for a symbol of arity {m.arity}.")
    if not indices or indices[0] != 1:
        raise InvalidIndexPatternError("The first consummation index must be 1.")
    if any(b <= a for a, b in zip(indices, indices[1:])) or indices[-1] > n:
        raise InvalidIndexPatternError(f"Indices {tuple(indices)} must increase strictly and stay below {n + 1}.")


def consummated_symbol(m: Symbol, indices: Sequence[int], n: int) -> Symbol:
    """
    m_tilde(s_1, ..., s_n) = m(s_{i_1} ... s_{i_2 - 1}, ..., s_{i_k} ... s_n) for 1 = i_1 < ... < i_k <= n.
    """
    _check_consummation(m, indices, n)
    group = m.parent
    grids = _grids(group, n)
    products = tuple(_block_product(group, grids[start:stop]) for start, stop in _blocks(indices, n))
    return Symbol(group, np.broadcast_to(m.values[products], (group.order,) * n))


def consummation_exponents(exponents: Sequence[float], indices: Sequence[int]) -> Tuple[float, ...]:
    """Exponents of the consummated inputs, 1/q_j = sum of 1/p_l over the j-th block."""
    return tuple(harmonic_exponent(*exponents[start:stop]) for start, stop in _blocks(indices, len(exponents)))


def _random_inputs(group: FiniteGroup, count: int, rng: np.random.Generator) -> List[AlgebraElement]:
    return [random_element(group, rng) for _ in range(count)]


def consummation_residual(m: Symbol, indices: Sequence[int], n: int, trials: int = 10, seed: int = 0) -> float:
    """
    Largest L_2 deviation between T_m_tilde(x_1, ..., x_n) and T_m applied to the block products of the inputs.

    Args:
        m (Symbol): symbol of arity k.
        indices (Sequence[int]): 1 = i_1 < ... < i_k <= n.
        n (int): arity of the consummated symbol.
        trials (int): number of random input tuples.
        seed (int): random seed.
    """
    consummated = consummated_symbol(m, indices, n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        inputs = _random_inputs(m.parent, n, rng)
        products = [convolve_all(inputs[start:stop]) for start, stop in _blocks(indices, n)]
        difference = apply_multiplier(consummated, *inputs) - apply_multiplier(m, *products)
        worst = max(worst, l2_norm(difference))
    return worst


def translated_symbol(m: Symbol, i: int, r: int, t: int, r_prime: int) -> Symbol:
    """
    m_tilde(s) = m(r s_1, s_2, ..., s_i t, t^-1 s_{i+1}, ..., s_n r') for 1 <= i <= n - 1.
    """
    n = m.arity
    if n < 2 or not 1 <= i <= n - 1:
        raise InvalidIndexPatternError(f"Translation slot {i} must satisfy 1 <= i <= {n - 1}.")
    group = m.parent
    arguments = _grids(group, n)
    arguments[0] = group.mul[r, arguments[0]]
    arguments[i - 1] = group.mul[arguments[i - 1], t]
    arguments[i] = group.mul[group.inv[t], arguments[i]]
    arguments[n - 1] = group.mul[arguments[n - 1], r_prime]
    return Symbol(group, np.broadcast_to(m.values[tuple(arguments)], (group.order,) * n))


def _translated_inputs(
    inputs: Sequence[AlgebraElement], i: int, r: int, t: int, r_prime: int
) -> List[AlgebraElement]:
    group = inputs[0].parent
    moved = list(inputs)
    moved[0] = convolve(delta(group, r), moved[0])
    moved[i - 1] = convolve(moved[i - 1], delta(group, t))
    moved[i] = convolve(delta(group, int(group.inv[t])), moved[i])
    moved[-1] = convolve(moved[-1], delta(group, r_prime))
    return moved


def translation_residual(
    m: Symbol,
    i: int,
    r: int,
    t: int,
    r_prime: int,
    trials: int = 10,
    seed: int = 0,
    exponents: Sequence[float] | None = None,
    p: float | None = None,
) -> float:
    """
    Largest deviation between T_m_tilde(x) and lambda(r)* T_m(lambda(r) x_1, ..., x_i lambda(t),
    lambda(t)* x_{i+1}, ..., x_n lambda(r')) lambda(r')*.

    When exponents and p are given the multiplier ratios of x for m_tilde and of the transported inputs for m
    are compared as well; translations are isometries so both ratios coincide.
    """
    translated = translated_symbol(m, i, r, t, r_prime)
    group = m.parent
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        inputs = _random_inputs(group, m.arity, rng)
        moved = _translated_inputs(inputs, i, r, t, r_prime)
        inner = apply_multiplier(m, *moved)
        rhs = convolve(convolve(delta(group, int(group.inv[r])), inner), delta(group, int(group.inv[r_prime])))
        worst = max(worst, l2_norm(apply_multiplier(translated, *inputs) - rhs))
        if exponents is not None and p is not None:
            gap = abs(multiplier_ratio(translated, inputs, exponents, p) - multiplier_ratio(m, moved, exponents, p))
            worst = max(worst, gap)
    return worst


def nested_symbol(symbols: Sequence[Symbol]) -> Symbol:
    """
    m_tilde(s_1, ..., s_n) = m_1(s_1 ... s_{n-1}) m_2(s_2 ... s_{n-1}) ... m_{n-1}(s_{n-1}) m_n(s_n).
    """
    _check_linear_family(symbols)
    group = symbols[0].parent
    n = len(symbols)
    grids = _grids(group, n)
    values = symbols[-1].values[grids[-1]]
    suffix = None
    for j in range(n - 2, -1, -1):
        suffix = grids[j] if suffix is None else group.mul[grids[j], suffix]
        values = values * symbols[j].values[suffix]
    return Symbol(group, np.broadcast_to(values, (group.order,) * n))


def _check_linear_family(symbols: Sequence[Symbol]) -> None:
    if not symbols:
        raise ArityMismatchError("At least one symbol is needed.")
    for symbol in symbols:
        if symbol.arity != 1:
            raise ArityMismatchError("Nested composition needs linear symbols.")
        require_same_group(symbols[0].parent, symbol.parent)


def nested_composition(symbols: Sequence[Symbol], inputs: Sequence[AlgebraElement]) -> AlgebraElement:
    """T_{m_1}(x_1 T_{m_2}(x_2 ... T_{m_{n-1}}(x_{n-1}))) T_{m_n}(x_n)"""
    _check_linear_family(symbols)
    n = len(symbols)
    if len(inputs) != n:
        raise ArityMismatchError(f"{n} symbols need {n} inputs, got {len(inputs)}.")
    if n == 1:
        return apply_multiplier(symbols[0], inputs[0])
    inner = apply_multiplier(symbols[n - 2], inputs[n - 2])
    for j in range(n - 3, -1, -1):
        inner = apply_multiplier(symbols[j], convolve(inputs[j], inner))
    return convolve(inner, apply_multiplier(symbols[-1], inputs[-1]))


def nested_residual(symbols: Sequence[Symbol], trials: int = 10, seed: int = 0) -> float:
    """Largest L_2 deviation between T_m_tilde(x_1, ..., x_n) and the nested composition."""
    combined = nested_symbol(symbols)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        inputs = _random_inputs(combined.parent, len(symbols), rng)
        difference = apply_multiplier(combined, *inputs) - nested_composition(symbols, inputs)
        worst = max(worst, l2_norm(difference))
    return worst


####################
# TRANSFERENCE     #
####################


@dataclass(frozen=True)
class TransferenceResult:
    """Both pairings of the bilinear transference identity at one Folner radius."""

    alpha: int
    absolute: float
    relative: float
    finite_pairing: complex
    group_pairing: complex


def folner_set(order: int, alpha: int) -> np.ndarray:
    """Indices of {-alpha, ..., alpha} mod order"""
    return np.arange(-alpha, alpha + 1) % order


def hertz_schur_transference_residual(
    m: Symbol,
    alpha: int,
    p1: float,
    p2: float,
    x: AlgebraElement,
    y: AlgebraElement,
    z: AlgebraElement,
) -> TransferenceResult:
    """
    Compare the Schur multiplier pairing on Folner compressions with the group algebra pairing.

    The Schur multiplier is S_M(A, B)_{s,t} = sum_r m(s r^-1, r t^-1) A_{s,r} B_{r,t}, the compressions are
    j_p(x) = |F|^(-1/p) P_F lambda(x) P_F, and the residual is
    |tr(S_M(j_{p1}(x), j_{p2}(y)) j_{p'}(z)*) - tau(T_m(x, y) z*)| with 1/p = 1/p1 + 1/p2.

    Raises:
        ArityMismatchError: m is not bilinear.
        FolnerRadiusError: alpha > L/4.
        InvalidExponentError: p1 or p2 outside [1, inf).
    """
    group = m.parent
    # 1. check arity, radius and exponents
    if m.arity != 2:
        raise ArityMismatchError("Transference needs a bilinear symbol.")
    if alpha < 0 or 4 * alpha > group.order:
        raise FolnerRadiusError(f"Folner radius {alpha} is too large for a group of order {group.order}.")
    for q in (p1, p2):
        if check_exponent(q) == INF:
            raise InvalidExponentError("Transference exponents must be finite.")
    for element in (x, y, z):
        require_same_group(group, element.parent)

    # 2. compressions to the Folner set
    folner = folner_set(group.order, alpha)
    size = folner.size
    p = harmonic_exponent(p1, p2)
    q = conjugate_exponent(p)
    window = np.ix_(folner, folner)
    compressed_x = size ** (-1.0 / p1) * regular_matrix(x)[window]
    compressed_y = size ** (-1.0 / p2) * regular_matrix(y)[window]
    compressed_z = (size ** (-1.0 / q) if q != INF else 1.0) * regular_matrix(z)[window]

    # 3. Schur multiplier on the window, kernel m(s r^-1, r t^-1)
    differences = group.mul[folner[:, None], group.inv[folner][None, :]]
    kernel = m.values[differences[:, :, None], differences[None, :, :]]
    schur = np.einsum("srt,sr,rt->st", kernel, compressed_x, compressed_y)
    finite_pairing = complex(np.sum(schur * np.conj(compressed_z)))

    group_pairing = complex(np.sum(apply_multiplier(m, x, y).coeffs * np.conj(z.coeffs)))
    absolute = abs(finite_pairing - group_pairing)
    relative = absolute / abs(group_pairing) if group_pairing != 0 else absolute
    logger.debug("transference alpha=%d absolute=%.3e relative=%.3e", alpha, absolute, relative)
    return TransferenceResult(alpha, absolute, relative, finite_pairing, group_pairing)


def transference_inputs(
    group: FiniteGroup, radius: int, seed: int, width: float = 1.5
) -> Tuple[Symbol, AlgebraElement, AlgebraElement, AlgebraElement]:
    """
    Nonnegative inputs for the transference check.

    x, y, z carry a Gaussian envelope exp(-t^2 / (2 width^2)) on {-radius, ..., radius} times uniform factors in
    [0.5, 1.5]; the bilinear symbol is real with entries in [0.5, 1.5].
    """
    rng = np.random.default_rng(seed)
    offsets = np.arange(-radius, radius + 1)
    envelope = np.exp(-(offsets**2) / (2.0 * width**2))
    elements = []
    for _ in range(3):
        coeffs = np.zeros(group.order, dtype=np.complex128)
        coeffs[offsets % group.order] = envelope * rng.uniform(0.5, 1.5, size=offsets.size)
        elements.append(AlgebraElement(group, coeffs))
    return (positive_symbol(group, 2, rng), *elements)
