"""
De Leeuw Harness Module

Exact finite-scale checks of the restriction machinery: the almost-invariance constant
delta_F(V) = |cap_{s in F} s V s^-1| / |V| by counting, its Gram matrix, the local embedding maps
x -> x h_V^(2/p), restriction consistency by witness transport, periodization along a normal
subgroup and the lattice approximation maps built from fundamental domains.

Contract failures are returned as ResidualReport objects with passed = False; only violated
preconditions raise.

"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from nc_restriction.finite_groups import (
    EmptySubsetError,
    FiniteGroup,
    GroupSubset,
    QuotientMap,
    SubgroupEmbedding,
    build_group,
    random_subset,
    require_same_group,
    subgroup_embedding,
)
from nc_restriction.group_algebra import (
    AlgebraElement,
    convolve,
    delta,
    indicator,
    involution,
    pull_back,
    push_forward,
    random_element,
    regular_matrix,
)
from nc_restriction.multipliers import Symbol, apply_multiplier, multiplier_ratio, restrict_symbol
from nc_restriction.noncommutative_lp import (
    INF,
    InvalidExponentError,
    check_exponent,
    harmonic_exponent,
    holder_witness,
    l2_norm,
    lp_norm,
    plancherel_trace,
    polar_parts,
    polar_power,
    quotient_lp_norm,
    schatten_norm,
)
from nc_restriction.norm_estimation import OptimizerConfig, estimate_norm
from nc_restriction.reporting import ResidualReport

logger = logging.getLogger(__name__)

GRAM_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-10
CONTRACTION_TOLERANCE = 1e-9
RESTRICTION_TOLERANCE = 1e-6
TRANSPORT_TOLERANCE = 1e-9
RESTRICTION_ORDER_LIMIT = 64
GRAM_GROUPS = (
    "dihedral:3",
    "dihedral:4",
    "dihedral:6",
    "heisenberg:2",
    "heisenberg:3",
    "product:dihedral:3,cyclic:2",
)


class DisjointnessError(Exception):
    """Exception raised when a disjointness condition of the local embedding maps fails"""


class FundamentalDomainError(Exception):
    """Exception raised when a set is not a fundamental domain for a subgroup"""


#####################
# ALMOST INVARIANCE #
#####################


@dataclass(frozen=True)
class DeltaValue:
    """delta_F(V) as the exact fraction numerator / denominator."""

    numerator: int
    denominator: int
    F: GroupSubset
    V: GroupSubset

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def value(self) -> float:
        return self.numerator / self.denominator


def _conjugate_masks(F: GroupSubset, V: GroupSubset) -> np.ndarray:
    """Row k is the indicator of s_k V s_k^-1."""
    group = V.parent
    masks = np.zeros((F.size, group.order), dtype=bool)
    if F.size:
        conjugated = group.mul[group.mul[F.array[:, None], V.array[None, :]], group.inv[F.array][:, None]]
        np.put_along_axis(masks, conjugated, True, axis=1)
    return masks


def delta_exact(F: GroupSubset, V: GroupSubset) -> DeltaValue:
    """
    Exact delta_F(V); an empty F gives 1.

    Raises:
        EmptySubsetError: V is empty.
        ParentMismatchError: F and V live on different groups.
    """
    require_same_group(F.parent, V.parent)
    if V.size == 0:
        raise EmptySubsetError("delta_F(V) needs a nonempty V.")
    surviving = np.logical_and.reduce(_conjugate_masks(F, V), axis=0) if F.size else V.mask()
    return DeltaValue(int(np.count_nonzero(surviving)), V.size, F, V)


def delta_batch(configurations: Sequence[Tuple[GroupSubset, GroupSubset]], workers: int = 1) -> List[DeltaValue]:
    """delta_exact for many (F, V) pairs, results in input order"""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda pair: delta_exact(*pair), configurations))
    return [delta_exact(F, V) for F, V in configurations]


def support_constant(U: GroupSubset, neighbourhoods: Sequence[GroupSubset]) -> float:
    """
    Finite-scale support constant: the largest delta_U(V)^(1/2) over the supplied neighbourhoods.

    delta is monotone in F, so the infimum over finite F inside U is attained at F = U.
    """
    if not neighbourhoods:
        raise EmptySubsetError("At least one neighbourhood is needed.")
    return max(math.sqrt(delta_exact(U, V).value) for V in neighbourhoods)


@dataclass(frozen=True)
class GramReport:
    """Overlap matrix A_{s,t} = |Ad_s V cap Ad_t V| / |V| with the minimal eigenvalues of A and A - delta J."""

    matrix: np.ndarray
    delta: DeltaValue
    min_eigenvalue: float
    min_shifted_eigenvalue: float

    def to_report(self, tolerance: float = GRAM_TOLERANCE) -> ResidualReport:
        residual = max(0.0, -self.min_eigenvalue, -self.min_shifted_eigenvalue)
        return ResidualReport(
            "overlap matrix positivity",
            residual,
            tolerance,
            {
                "delta": str(self.delta.fraction),
                "min_eigenvalue": self.min_eigenvalue,
                "min_shifted_eigenvalue": self.min_shifted_eigenvalue,
                "size": int(self.matrix.shape[0]),
            },
        )


def gram_matrix(F: GroupSubset, V: GroupSubset) -> GramReport:
    """
    Overlap matrix of the conjugates of V.

    A - delta_F(V) J, with J the all-ones matrix, is the Gram matrix of the indicators of Ad_s V minus the
    indicator of their intersection, so both A and A - delta J are positive semidefinite.

    Raises:
        EmptySubsetError: F or V is empty.
    """
    if F.size == 0:
        raise EmptySubsetError("The overlap matrix needs a nonempty F.")
    value = delta_exact(F, V)
    masks = _conjugate_masks(F, V).astype(float)
    matrix = masks @ masks.T / V.size
    shifted = matrix - value.value * np.ones_like(matrix)
    return GramReport(
        matrix,
        value,
        float(scipy.linalg.eigvalsh(matrix)[0]),
        float(scipy.linalg.eigvalsh(shifted)[0]),
    )


def random_gram_configurations(seed: int, count: int) -> List[Tuple[GroupSubset, GroupSubset]]:
    """Random (F, V) pairs over small nonabelian groups"""
    rng = np.random.default_rng(seed)
    groups = [build_group(descriptor) for descriptor in GRAM_GROUPS]
    configurations = []
    for _ in range(count):
        group = groups[int(rng.integers(len(groups)))]
        F = random_subset(group, rng, int(rng.integers(1, 6)))
        V = random_subset(group, rng, int(rng.integers(1, max(2, group.order // 2))))
        configurations.append((F, V))
    return configurations


####################
# LOCAL EMBEDDINGS #
####################


def _translate_overlap(group: FiniteGroup, left: np.ndarray, V: GroupSubset) -> bool:
    """True when the translates sV, s in left, are not pairwise disjoint."""
    if left.size == 0:
        return False
    counts = np.bincount(group.mul[left[:, None], V.array[None, :]].ravel(), minlength=group.order)
    return bool(np.any(counts > 1))


def _two_sided_overlap(group: FiniteGroup, left: np.ndarray, V: GroupSubset, right: np.ndarray) -> bool:
    """True when s_1 V t_1 and s_2 V t_2 meet although s_1 t_1 != s_2 t_2."""
    owner = np.full(group.order, -1, dtype=np.int64)
    for s in left.tolist():
        for t in right.tolist():
            label = int(group.mul[s, t])
            cells = group.mul[group.mul[s, V.array], t]
            taken = owner[cells]
            if np.any((taken >= 0) & (taken != label)):
                return True
            owner[cells] = label
    return False


def _local_embedding_norm(embedding: SubgroupEmbedding, x: AlgebraElement, V: GroupSubset, p: float) -> float:
    """||x h_V^(2/p)||_p computed in the ambient group."""
    pair = polar_parts(V)
    power = 0.0 if p == INF else 2.0 / p
    matrix = regular_matrix(push_forward(embedding, x)) @ polar_power(pair, power)
    return schatten_norm(matrix, p, embedding.amb.order)


def embedding_contraction_residual(
    embedding: SubgroupEmbedding, x: AlgebraElement, V: GroupSubset, p: float
) -> ResidualReport:
    """
    Contraction of the local embedding x -> x h_V^(2/p) from L_p of the subgroup into L_p of the ambient group.

    Args:
        embedding (SubgroupEmbedding): Gamma inside G.
        x (AlgebraElement): element of the subgroup algebra.
        V (GroupSubset): symmetric subset of G.
        p (float): exponent in [1, inf].

    Raises:
        DisjointnessError: the translates sV, s in supp x, overlap.
        NotSymmetricError: V is not symmetric.
    """
    p = check_exponent(p)
    require_same_group(embedding.amb, V.parent)
    # 1. check the disjointness hypothesis
    support = embedding.map[x.support().array]
    if _translate_overlap(embedding.amb, support, V):
        raise DisjointnessError("The translates sV for s in supp x are not pairwise disjoint.")

    # 2. compare both norms, with equality at p = 2
    embedded = _local_embedding_norm(embedding, x, V, p)
    original = lp_norm(x, p)
    residual = abs(embedded - original) if p == 2 else max(0.0, embedded - original)
    name = "local embedding isometry" if p == 2 else "local embedding contraction"
    return ResidualReport(name, residual, IDENTITY_TOLERANCE, {"p": p, "embedded": embedded, "original": original})


def embedding_lower_residual(
    embedding: SubgroupEmbedding,
    x: AlgebraElement,
    V: GroupSubset,
    p: float,
    y: AlgebraElement | None = None,
) -> ResidualReport:
    """
    Lower bound delta_F(V)^(1/2) ||x y||_2 / ||y||_q <= ||x h_V^(2/p)||_p with q = 2p / (p - 2) and F = supp x.

    The default dual witness is the Hoelder-sharp y = |x|^(p/q).

    Raises:
        InvalidExponentError: p is not in (2, inf).
        DisjointnessError: one of the three disjointness conditions fails; the message names it.
    """
    p = check_exponent(p)
    if not 2 < p < INF:
        raise InvalidExponentError(f"The lower bound needs 2 < p < inf, got {p}.")
    require_same_group(embedding.amb, V.parent)
    q = 2.0 * p / (p - 2.0)
    y = holder_witness(x, p, q) if y is None else y
    require_same_group(embedding.sub, y.parent)
    group = embedding.amb

    # 1. the three disjointness conditions
    left = embedding.map[x.support(1e-12).array]
    right = embedding.map[y.support(1e-12).array]
    if _translate_overlap(group, left, V):
        raise DisjointnessError("Condition (1) fails: the translates sV for s in supp x overlap.")
    if _translate_overlap(group, group.inv[right], V):
        raise DisjointnessError("Condition (2) fails: the translates sV for s in (supp y)^-1 overlap.")
    if _two_sided_overlap(group, left, V, right):
        raise DisjointnessError("Condition (3) fails: s_1 V t_1 meets s_2 V t_2 with s_1 t_1 != s_2 t_2.")

    # 2. both sides of the inequality
    value = delta_exact(GroupSubset(group, tuple(left.tolist())), V)
    y_norm = lp_norm(y, q)
    holder_bound = l2_norm(convolve(x, y)) / y_norm if y_norm > 0 else 0.0
    bound = math.sqrt(value.value) * holder_bound
    embedded = _local_embedding_norm(embedding, x, V, p)
    return ResidualReport(
        "local embedding lower bound",
        max(0.0, bound - embedded),
        CONTRACTION_TOLERANCE,
        {
            "p": p,
            "q": q,
            "delta": str(value.fraction),
            "bound": bound,
            "holder_bound": holder_bound,
            "embedded": embedded,
        },
    )


def untestable_report(name: str, reason: str) -> ResidualReport:
    """Report for a configuration whose hypotheses fail, kept in the output instead of being skipped"""
    logger.warning("%s is untestable: %s", name, reason)
    return ResidualReport(name, math.nan, CONTRACTION_TOLERANCE, {"untestable": reason})


####################
# RESTRICTION      #
####################


def restriction_consistency(
    embedding: SubgroupEmbedding,
    m: Symbol,
    exponents: Sequence[float],
    p: float,
    cfg: OptimizerConfig | None = None,
) -> ResidualReport:
    """
    Restriction inequality by witness transport.

    The restricted symbol is optimised on the subgroup, its witness is pushed into the ambient group where its
    ratio must be unchanged, and the ambient optimiser is seeded with the transported witness. The residual is
    the larger of the transport gap and the excess of the restricted estimate over the ambient one.
    """
    cfg = cfg or OptimizerConfig()
    if embedding.amb.order > RESTRICTION_ORDER_LIMIT:
        logger.warning("Restriction check on a group of order %d exceeds the tested range", embedding.amb.order)
    restricted = estimate_norm(restrict_symbol(m, embedding), exponents, p, cfg)
    transported = [push_forward(embedding, x) for x in restricted.witness]
    transported_ratio = multiplier_ratio(m, transported, exponents, p)
    ambient = estimate_norm(m, exponents, p, cfg, initial_witnesses=[transported])
    transport_gap = abs(transported_ratio - restricted.value)
    excess = max(0.0, restricted.value - ambient.value)
    residual = max(excess, transport_gap if transport_gap > TRANSPORT_TOLERANCE else 0.0)
    return ResidualReport(
        "restriction inequality",
        residual,
        RESTRICTION_TOLERANCE,
        {
            "p": p,
            "exponents": list(exponents),
            "restricted": restricted.value,
            "ambient": ambient.value,
            "transport_gap": transport_gap,
            "subgroup_order": embedding.sub.order,
            "group_order": embedding.amb.order,
        },
    )


####################
# PERIODIZATION    #
####################


def periodize(qmap: QuotientMap, m_q: Symbol) -> Symbol:
    """m_pi(g_1, ..., g_n) = m_q(g_1 H, ..., g_n H)"""
    require_same_group(qmap.quotient, m_q.parent)
    return Symbol(qmap.group, m_q.values[np.ix_(*([qmap.projection] * m_q.arity))])


def periodization_map(qmap: QuotientMap, x: AlgebraElement) -> AlgebraElement:
    """pi(lambda(gH)) = lambda(g) Pi with Pi = |H|^-1 sum_h lambda(h), i.e. pi(x)(g) = x(gH) / |H|."""
    require_same_group(qmap.quotient, x.parent)
    return AlgebraElement(qmap.group, x.coeffs[qmap.projection] / qmap.kernel_order)


def central_projection(qmap: QuotientMap) -> AlgebraElement:
    """Pi = |H|^-1 lambda(1_H)"""
    return indicator(qmap.kernel) * (1.0 / qmap.kernel_order)


def periodization_residual(
    qmap: QuotientMap,
    m_q: Symbol,
    trials: int = 10,
    seed: int = 0,
    exponents: Sequence[float] | None = None,
) -> ResidualReport:
    """
    Intertwining pi T_{m_q}(x_1, ..., x_n) = T_{m_pi}(pi x_1, ..., pi x_n) for the periodized symbol.

    The residual also covers the L_p isometry of pi against the quotient norm, the trace identity
    tau(pi x) = tau(x) / |H| and pi(delta_{gH}) = delta_g * Pi for the coset representatives.
    """
    exponents = tuple(exponents) if exponents is not None else (2.0,) * m_q.arity
    rng = np.random.default_rng(seed)
    lifted = periodize(qmap, m_q)
    kernel_order = qmap.kernel_order
    intertwining = isometry = trace = 0.0
    for _ in range(trials):
        inputs = [random_element(qmap.quotient, rng) for _ in range(m_q.arity)]
        lhs = periodization_map(qmap, apply_multiplier(m_q, *inputs))
        rhs = apply_multiplier(lifted, *[periodization_map(qmap, x) for x in inputs])
        intertwining = max(intertwining, l2_norm(lhs - rhs))
        for x, q in zip(inputs, exponents):
            lifted_norm = lp_norm(periodization_map(qmap, x), q)
            isometry = max(isometry, abs(lifted_norm - quotient_lp_norm(x, q, kernel_order)))
            trace = max(trace, abs(plancherel_trace(periodization_map(qmap, x)) - plancherel_trace(x) / kernel_order))

    projection = central_projection(qmap)
    cosets = 0.0
    for coset, representative in enumerate(qmap.representatives.tolist()):
        lifted_delta = periodization_map(qmap, delta(qmap.quotient, coset))
        cosets = max(cosets, l2_norm(lifted_delta - convolve(delta(qmap.group, representative), projection)))

    residual = max(intertwining, isometry, trace, cosets)
    return ResidualReport(
        "periodization intertwining",
        residual,
        IDENTITY_TOLERANCE,
        {
            "intertwining": intertwining,
            "isometry": isometry,
            "trace": trace,
            "cosets": cosets,
            "kernel_order": kernel_order,
            "exponents": list(exponents),
        },
    )


####################
# LATTICE MAPS     #
####################


@dataclass(frozen=True)
class LatticeLevel:
    """A subgroup Gamma together with a fundamental domain X, G = disjoint union of gamma X."""

    embedding: SubgroupEmbedding
    domain: GroupSubset

    def __post_init__(self) -> None:
        group = self.embedding.amb
        require_same_group(group, self.domain.parent)
        cells = group.mul[self.embedding.map[:, None], self.domain.array[None, :]]
        counts = np.bincount(cells.ravel(), minlength=group.order)
        if np.any(counts != 1):
            raise FundamentalDomainError(f"{self.domain.members} is not a fundamental domain for the subgroup.")


def dyadic_levels(group: FiniteGroup, powers: Sequence[int]) -> List[LatticeLevel]:
    """Levels Gamma_k = 2^k Z_N with X_k = {0, ..., 2^k - 1} on a cyclic group."""
    levels = []
    for k in powers:
        spacing = 2**k
        embedding = subgroup_embedding(group, range(0, group.order, spacing), label=f"{spacing}Z_{group.order}")
        levels.append(LatticeLevel(embedding, GroupSubset(group, tuple(range(spacing)))))
    return levels


def lattice_lift(level: LatticeLevel, w: AlgebraElement, p: float) -> AlgebraElement:
    """|X|^(-2 + 1/p) 1_X* iota(w) 1_X"""
    size = level.domain.size
    h = indicator(level.domain)
    scale = size ** (-2.0 + (0.0 if p == INF else 1.0 / p))
    return convolve(convolve(involution(h), push_forward(level.embedding, w)), h) * scale


def lattice_restrict(level: LatticeLevel, x: AlgebraElement, p: float) -> AlgebraElement:
    """|X|^(-1 - 1/p) E_Gamma(1_X x 1_X*), the coefficients tau(h* lambda(gamma^-1) h x) on the subgroup"""
    size = level.domain.size
    h = indicator(level.domain)
    scale = size ** (-1.0 - (0.0 if p == INF else 1.0 / p))
    return pull_back(level.embedding, convolve(convolve(h, x), involution(h))) * scale


def lattice_multiplier(
    level: LatticeLevel, m: Symbol, inputs: Sequence[AlgebraElement], exponents: Sequence[float]
) -> AlgebraElement:
    """Phi^(p) T_{m|Gamma}(Psi^(p_1) x_1, ..., Psi^(p_n) x_n) with 1/p = sum 1/p_i"""
    p = harmonic_exponent(*exponents)
    restricted = restrict_symbol(m, level.embedding)
    compressed = [lattice_restrict(level, x, q) for x, q in zip(inputs, exponents)]
    return lattice_lift(level, apply_multiplier(restricted, *compressed), p)


def smooth_inputs(group: FiniteGroup, count: int, kappa: float = 2.0) -> List[AlgebraElement]:
    """count copies of the profile exp(kappa (cos(2 pi s / N) - 1)), with shifted copies for distinct slots"""
    angles = 2.0 * np.pi * np.arange(group.order) / group.order
    return [
        AlgebraElement(group, np.exp(kappa * (np.cos(angles - 2.0 * np.pi * k / group.order) - 1.0)))
        for k in range(count)
    ]


def lattice_maps_report(
    levels: Sequence[LatticeLevel],
    m: Symbol,
    exponents: Sequence[float] | None = None,
    trials: int = 5,
    seed: int = 0,
    inputs: Sequence[AlgebraElement] | None = None,
) -> List[ResidualReport]:
    """
    Contraction of the lattice maps at every level and convergence of the lattice multipliers.

    For each level the lift Phi^(q) and the compression Psi^(q) are checked to be contractive for every exponent
    q in the tuple and its harmonic exponent. The pairing deviation |<y, S(x)> - <y, T_m(x)>| is computed for the
    smooth inputs at every level; the last report requires it to decrease strictly along the levels.

    Args:
        levels (Sequence[LatticeLevel]): refining levels, coarsest first.
        m (Symbol): smooth symbol on the ambient group.
        exponents (Sequence[float]): (p_1, ..., p_n), default all equal to n so that p = 1.
        trials (int): random inputs per contraction check.
        seed (int): random seed.
        inputs (Sequence[AlgebraElement]): x_1, ..., x_n and the test element y.
    """
    if not levels:
        raise FundamentalDomainError("At least one lattice level is needed.")
    group = m.parent
    exponents = tuple(exponents) if exponents is not None else (float(m.arity),) * m.arity
    p = harmonic_exponent(*exponents)
    inputs = list(inputs) if inputs is not None else smooth_inputs(group, m.arity + 1)
    *arguments, test = inputs
    exact = apply_multiplier(m, *arguments)
    target = complex(np.sum(np.conj(test.coeffs) * exact.coeffs))

    rng = np.random.default_rng(seed)
    reports = []
    deviations = []
    for index, level in enumerate(levels):
        require_same_group(group, level.embedding.amb)
        lift = compression = 0.0
        for q in sorted(set(exponents) | {p}):
            for _ in range(trials):
                w = random_element(level.embedding.sub, rng)
                lift = max(lift, lp_norm(lattice_lift(level, w, q), q) - lp_norm(w, q))
                x = random_element(group, rng)
                compression = max(compression, lp_norm(lattice_restrict(level, x, q), q) - lp_norm(x, q))
        approximation = lattice_multiplier(level, m, arguments, exponents)
        deviation = abs(complex(np.sum(np.conj(test.coeffs) * approximation.coeffs)) - target)
        deviations.append(deviation)
        reports.append(
            ResidualReport(
                "lattice map contraction",
                max(0.0, lift, compression),
                CONTRACTION_TOLERANCE,
                {
                    "level": index,
                    "subgroup_order": level.embedding.sub.order,
                    "domain_size": level.domain.size,
                    "lift": lift,
                    "compression": compression,
                    "pairing_deviation": deviation,
                },
            )
        )

    # number of refinement steps where the deviation did not drop
    stalls = sum(later >= earlier for earlier, later in zip(deviations, deviations[1:]))
    reports.append(
        ResidualReport(
            "lattice multiplier convergence",
            float(stalls),
            0.0,
            {"deviations": deviations, "exponents": list(exponents), "p": p},
        )
    )
    logger.info("lattice pairing deviations %s", ["%.3e" % d for d in deviations])
    return reports
