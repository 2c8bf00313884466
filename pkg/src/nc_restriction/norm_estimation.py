"""
Norm Estimation Module

Lower bounds for the norm of a multilinear multiplier

    ||T_m : L_{p_1} x ... x L_{p_n} -> L_p||

by multi-start projected gradient ascent on the ratio ||T_m(x_1, ..., x_n)||_p / prod_i ||x_i||_{p_i}.
Every returned value is the evaluated ratio of a stored witness, so it is a certified lower bound.

"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from nc_restriction.finite_groups import FiniteGroup
from nc_restriction.group_algebra import AlgebraElement, delta, pairing_coefficients, random_element, regular_matrix
from nc_restriction.multipliers import (
    ArityMismatchError,
    Symbol,
    apply_multiplier,
    multiplier_ratio,
    slot_gradient,
)
from nc_restriction.noncommutative_lp import (
    INF,
    InvalidExponentError,
    check_exponent,
    conjugate_exponent,
    lp_norm,
)
from nc_restriction.reporting import ResidualReport

logger = logging.getLogger(__name__)

JITTER = 1e-9
MIN_STEP = 1e-12


class OptimizerConfig(BaseModel):
    """Settings of the multi-start ascent"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    restarts: int = Field(20, ge=1)
    max_iterations: int = Field(200, ge=1)
    step_tolerance: float = Field(1e-10, gt=0)
    seed: int = Field(0, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)
    smoothing: float = Field(1e-6, gt=0, le=1e-2)


@dataclass(frozen=True)
class NormEstimate:
    """
    Best ratio found and the inputs attaining it.

    Attributes:
        value: ratio of the witness, a lower bound for the norm.
        witness: one element per slot.
        restarts: number of ascent runs (random starts and supplied witnesses).
        iterations: iterations of the run that produced the witness.
        converged: whether that run met the step tolerance before max_iterations.
        seed: seed of the random starts.
        exponents: (p_1, ..., p_n).
        p: target exponent.
        smoothing: offset s added to exponents equal to 1 during the ascent.
        smoothed_exponents: input exponents the ascent optimised.
        smoothed_p: target exponent the ascent optimised.
        bias_bound: largest factor between the smoothed and the exact ratio of one input tuple.
    """

    value: float
    witness: Tuple[AlgebraElement, ...]
    restarts: int
    iterations: int
    converged: bool
    seed: int
    exponents: Tuple[float, ...]
    p: float
    smoothing: float = 0.0
    smoothed_exponents: Tuple[float, ...] = ()
    smoothed_p: float | None = None
    bias_bound: float = 1.0

    def to_json(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "witness": [[[c.real, c.imag] for c in x.coeffs.tolist()] for x in self.witness],
            "restarts": self.restarts,
            "iterations": self.iterations,
            "converged": self.converged,
            "seed": self.seed,
            "exponents": list(self.exponents),
            "p": self.p,
            "smoothing": self.smoothing,
            "smoothed_exponents": list(self.smoothed_exponents),
            "smoothed_p": self.smoothed_p,
            "bias_bound": self.bias_bound,
            "group": self.witness[0].parent.label if self.witness else None,
            "lower_bound_only": True,
        }


def norm_estimate_from_json(group: FiniteGroup, data: Dict[str, Any]) -> NormEstimate:
    """Rebuild a NormEstimate written by to_json"""
    witness = tuple(AlgebraElement(group, np.array([complex(re, im) for re, im in x])) for x in data["witness"])
    return NormEstimate(
        value=float(data["value"]),
        witness=witness,
        restarts=int(data["restarts"]),
        iterations=int(data["iterations"]),
        converged=bool(data["converged"]),
        seed=int(data["seed"]),
        exponents=tuple(float(q) for q in data["exponents"]),
        p=float(data["p"]),
        smoothing=float(data.get("smoothing", 0.0)),
        smoothed_exponents=tuple(float(q) for q in data.get("smoothed_exponents", ())),
        smoothed_p=None if data.get("smoothed_p") is None else float(data["smoothed_p"]),
        bias_bound=float(data.get("bias_bound", 1.0)),
    )


@dataclass
class _Run:
    index: int
    witness: List[AlgebraElement]
    iterations: int
    converged: bool


def _schatten_gradient(matrix: np.ndarray, p: float) -> Tuple[float, np.ndarray]:
    """log ||A||_p (up to the trace normalisation) and its gradient for the pairing Re tr(G* dA)."""
    u, sigma, vh = np.linalg.svd(matrix)
    top = sigma[0]
    if top == 0 or not np.isfinite(top):
        return -np.inf, np.zeros_like(matrix)
    scaled = sigma / top
    total = np.sum(scaled**p)
    gradient = (u * (scaled ** (p - 1) / (top * total))) @ vh
    return float(np.log(top) + np.log(total) / p), gradient


def _objective(m: Symbol, inputs: Sequence[AlgebraElement], exponents: Sequence[float], p: float):
    """Smoothed log ratio and its gradient in every slot."""
    group = m.parent
    output = apply_multiplier(m, *inputs)
    value, output_gradient = _schatten_gradient(regular_matrix(output), p)
    coefficient_gradient = pairing_coefficients(group, output_gradient).coeffs
    gradients = []
    for slot, (x, q) in enumerate(zip(inputs, exponents)):
        slot_value, input_gradient = _schatten_gradient(regular_matrix(x), q)
        value -= slot_value
        gradients.append(
            slot_gradient(m, inputs, slot, coefficient_gradient)
            - pairing_coefficients(group, input_gradient).coeffs
        )
    return value, gradients


def _normalise(inputs: Sequence[AlgebraElement], exponents: Sequence[float]) -> List[AlgebraElement]:
    normalised = []
    for x, q in zip(inputs, exponents):
        norm = lp_norm(x, q)
        normalised.append(x * (1.0 / norm) if norm > 0 else x)
    return normalised


def _jitter(inputs: Sequence[AlgebraElement], rng: np.random.Generator) -> List[AlgebraElement]:
    return [x + random_element(x.parent, rng) * JITTER for x in inputs]


def _ascend(
    m: Symbol,
    start: Sequence[AlgebraElement],
    exponents: Sequence[float],
    p: float,
    cfg: OptimizerConfig,
    rng: np.random.Generator,
    index: int,
) -> _Run:
    """Projected gradient ascent with backtracking from one starting point."""
    current = _normalise(start, exponents)
    value, gradients = _objective(m, current, exponents, p)
    step = 1.0
    converged = False
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        # 1. degenerate points are perturbed
        if not np.isfinite(value) or not all(np.all(np.isfinite(g)) for g in gradients):
            current = _normalise(_jitter(current, rng), exponents)
            value, gradients = _objective(m, current, exponents, p)
            continue

        # 2. step length relative to the size of the iterate
        position_norm = np.sqrt(sum(np.sum(np.abs(x.coeffs) ** 2) for x in current))
        gradient_norm = np.sqrt(sum(np.sum(np.abs(g) ** 2) for g in gradients))
        if gradient_norm == 0:
            converged = True
            break
        scale = position_norm / gradient_norm

        # 3. backtracking until the smoothed objective improves
        while step >= MIN_STEP:
            candidate = _normalise(
                [AlgebraElement(x.parent, x.coeffs + step * scale * g) for x, g in zip(current, gradients)], exponents
            )
            candidate_value, candidate_gradients = _objective(m, candidate, exponents, p)
            if candidate_value > value:
                break
            step /= 2.0
        else:
            converged = True
            break

        gain = candidate_value - value
        current, value, gradients = candidate, candidate_value, candidate_gradients
        step = min(1.0, 1.5 * step)
        logger.debug("restart %d iteration %d objective %.12f gain %.3e", index, iteration, value, gain)
        if gain < cfg.step_tolerance:
            converged = True
            break
    return _Run(index, current, iteration, converged)


def _smoothed(q: float, smoothing: float) -> float:
    return 1.0 + smoothing if q == 1 else q


def smoothing_bias(order: int, exponents: Sequence[float], p: float, smoothing: float) -> float:
    """
    Bound on the ratio change caused by smoothing.

    With the normalised trace, ||x||_1 <= ||x||_{1+s} <= N^(1 - 1/(1+s)) ||x||_1 on a group of order N, so every
    smoothed slot (inputs and target) moves the ratio of a fixed input tuple by at most that factor.
    """
    smoothed = sum(1 for q in exponents if q == 1) + (1 if p == 1 else 0)
    return float(order ** (smoothed * (1.0 - 1.0 / (1.0 + smoothing))))


def _check_exponents(m: Symbol, exponents: Sequence[float], p: float) -> Tuple[Tuple[float, ...], float]:
    if len(exponents) != m.arity:
        raise ArityMismatchError(f"{len(exponents)} exponents given for a symbol of arity {m.arity}.")
    checked = tuple(check_exponent(q) for q in exponents)
    p = check_exponent(p)
    if p == INF or INF in checked:
        raise InvalidExponentError("Norm estimation needs finite exponents.")
    return checked, p


def estimate_norm(
    m: Symbol,
    exponents: Sequence[float],
    p: float,
    cfg: OptimizerConfig | None = None,
    initial_witnesses: Sequence[Sequence[AlgebraElement]] = (),
) -> NormEstimate:
    """
    Best found ratio ||T_m(x_1, ..., x_n)||_p / prod_i ||x_i||_{p_i}.

    Random starts use the stream default_rng([seed, restart index]), so the result does not depend on the
    number of workers. Supplied witnesses are evaluated as they are and also used as extra starting points.
    Exponents equal to 1 are replaced by 1 + smoothing during the ascent; values are always evaluated at the
    exact exponents and the estimate carries the smoothing together with its bias bound.

    Args:
        m (Symbol): symbol of arity n.
        exponents (Sequence[float]): (p_1, ..., p_n), all finite.
        p (float): target exponent, finite.
        cfg (OptimizerConfig): optimiser settings.
        initial_witnesses: tuples of n inputs to start from.

    Raises:
        ArityMismatchError: wrong number of exponents or witness entries.
        InvalidExponentError: an exponent is infinite or below 1.
    """
    cfg = cfg or OptimizerConfig()
    exponents, p = _check_exponents(m, exponents, p)
    group = m.parent

    # 1. the L_2 multiplier norm of a linear symbol is the sup norm
    if m.arity == 1 and p == 2 and exponents[0] == 2:
        peak = int(np.argmax(np.abs(m.values)))
        return NormEstimate(
            float(np.abs(m.values[peak])),
            (delta(group, peak),),
            0,
            0,
            True,
            cfg.seed,
            exponents,
            p,
            smoothed_exponents=exponents,
            smoothed_p=p,
        )

    for witness in initial_witnesses:
        if len(witness) != m.arity:
            raise ArityMismatchError(f"Initial witness with {len(witness)} entries for arity {m.arity}.")

    smooth_exponents = [_smoothed(q, cfg.smoothing) for q in exponents]
    smooth_p = _smoothed(p, cfg.smoothing)

    # 2. ascent runs, supplied witnesses first
    starts = [list(witness) for witness in initial_witnesses]

    def run(index: int) -> _Run:
        rng = np.random.default_rng([cfg.seed, index])
        if index < len(starts):
            start = starts[index]
        else:
            start = [random_element(group, rng) for _ in range(m.arity)]
        return _ascend(m, start, smooth_exponents, smooth_p, cfg, rng, index)

    indices = range(len(starts) + cfg.restarts)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(run, indices))
    else:
        runs = [run(index) for index in indices]

    # 3. candidates at the exact exponents, unpolished witnesses included
    candidates = [(multiplier_ratio(m, r.witness, exponents, p), r.index, r) for r in runs]
    candidates += [
        (multiplier_ratio(m, witness, exponents, p), index, _Run(index, list(witness), 0, True))
        for index, witness in enumerate(starts)
    ]
    value, _, best = min(candidates, key=lambda item: (-item[0], item[1]))
    if not best.converged:
        logger.warning("Best restart %d did not converge within %d iterations", best.index, cfg.max_iterations)
    logger.info("estimate_norm arity=%d p=%s exponents=%s value=%.12f", m.arity, p, exponents, value)
    return NormEstimate(
        float(value),
        tuple(best.witness),
        len(runs),
        best.iterations,
        best.converged,
        cfg.seed,
        exponents,
        p,
        smoothing=cfg.smoothing,
        smoothed_exponents=tuple(smooth_exponents),
        smoothed_p=smooth_p,
        bias_bound=smoothing_bias(group.order, exponents, p, cfg.smoothing),
    )


def duality_report(m: Symbol, p: float, cfg: OptimizerConfig | None = None, tolerance: float = 0.05) -> ResidualReport:
    """
    Compare the estimated L_p norm of T_m with the estimated L_p' norm of the reflected multiplier.

    The residual is the relative gap of the two found values; it is informational since both are lower bounds.
    """
    if m.arity != 1:
        raise ArityMismatchError("The duality report needs a linear symbol.")
    q = conjugate_exponent(p)
    primal = estimate_norm(m, (p,), p, cfg)
    dual = estimate_norm(m.reflect(), (q,), q, cfg)
    scale = max(primal.value, dual.value)
    gap = abs(primal.value - dual.value) / scale if scale > 0 else 0.0
    return ResidualReport(
        "multiplier duality",
        gap,
        tolerance,
        {"p": p, "p_conjugate": q, "primal": primal.value, "dual": dual.value, "informational": True},
    )
