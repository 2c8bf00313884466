"""
Monte Carlo Module

Batched Monte Carlo estimates of volumes and of the almost-invariance constant on Lie groups, the
scaling ratio of the tube around the nilpotent cone of sl(2, R), the lower bound check over random
elements of adjoint balls, and exact counting of SL(2, Z) points in adjoint balls with growth fits.

Every batch draws from default_rng([seed, batch index]) so results do not depend on the number of
workers; batch sums are reduced in batch order.

"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from nc_restriction.finite_groups import GroupSubset, require_same_group
from nc_restriction.lie_geometry import (
    AlgebraVector,
    GroupMatrix,
    InvalidRadiusError,
    LieModel,
    LogMapError,
    build_model,
    exp_density,
    exp_map,
    log_map,
    random_rotation,
    sl2_density,
    sl2_exp,
    sl2_log,
    sl2_tube_mask,
    sl2_tube_volume,
)
from nc_restriction.reporting import ResidualReport

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 1_000_000
MAX_BATCH = 1_000_000
MAX_LOG_FAILURE_RATE = 0.01
MAX_COUNT_RADIUS = 10_000


class LogRoundtripError(Exception):
    """Exception raised when too many samples fail the exp/log roundtrip"""


class RadiusTooLargeError(Exception):
    """Exception raised when a counting radius exceeds the supported range"""


class DegenerateSeriesError(Exception):
    """Exception raised when a count series cannot be fitted"""


class MalformedNeighbourhoodError(Exception):
    """Exception raised when a neighbourhood descriptor cannot be parsed"""


def largest_divisor(n: int, cap: int = MAX_BATCH) -> int:
    """Largest divisor of n not exceeding cap"""
    for candidate in range(min(n, cap), 0, -1):
        if n % candidate == 0:
            return candidate
    return 1


class McConfig(BaseModel):
    """Sample count, seed and batching of a Monte Carlo run"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    samples: int = Field(DEFAULT_SAMPLES, ge=10_000)
    seed: int = Field(0, ge=0, lt=2**64)
    batch: int = Field(MAX_BATCH, ge=1)
    workers: int = Field(1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _default_batch(cls, data):
        if isinstance(data, dict) and data.get("batch") is None:
            samples = int(data.get("samples", DEFAULT_SAMPLES))
            data = {**data, "batch": largest_divisor(samples) if samples > 0 else 1}
        return data

    @model_validator(mode="after")
    def _batch_divides_samples(self):
        if self.samples % self.batch != 0:
            raise ValueError(f"batch {self.batch} does not divide samples {self.samples}")
        return self

    @property
    def batches(self) -> int:
        return self.samples // self.batch


@dataclass(frozen=True)
class McEstimate:
    """
    Monte Carlo estimate.

    Attributes:
        mean: the estimate.
        stderr: its standard error, nan when no sample hit the set.
        samples: samples entering the estimate.
        seed: seed of the run.
        hits: samples inside the set.
        rejected: samples rejected by the exp/log roundtrip.
    """

    mean: float
    stderr: float
    samples: int
    seed: int
    hits: int
    rejected: int = 0

    @property
    def zero_information(self) -> bool:
        return self.hits == 0


def run_batches(cfg: McConfig, kernel: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    """Sum kernel(rng, batch) over all batches, each with its own stream."""

    def batch(index: int) -> np.ndarray:
        totals = np.asarray(kernel(np.random.default_rng([cfg.seed, index]), cfg.batch), dtype=float)
        logger.debug("batch %d of %d: %s", index + 1, cfg.batches, totals)
        return totals

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(batch, range(cfg.batches)))
    else:
        results = [batch(index) for index in range(cfg.batches)]
    total = results[0].copy()
    for result in results[1:]:
        total = total + result
    return total


def volume_mc(
    oracle: Callable[[np.ndarray], np.ndarray], half_width: float, dim: int, cfg: McConfig | None = None
) -> McEstimate:
    """
    Volume of {x : oracle(x)} inside the box [-half_width, half_width]^dim by rejection sampling.

    Args:
        oracle: vectorised membership test on arrays of shape (k, dim).
        half_width (float): half side of the box.
        dim (int): dimension.
        cfg (McConfig): sampling settings.
    """
    cfg = cfg or McConfig()
    if half_width <= 0:
        raise InvalidRadiusError(f"The box half width must be positive, got {half_width}.")
    box = (2.0 * half_width) ** dim

    def kernel(rng: np.random.Generator, size: int) -> np.ndarray:
        points = rng.uniform(-half_width, half_width, size=(size, dim))
        return np.array([np.count_nonzero(oracle(points))])

    hits = int(run_batches(cfg, kernel)[0])
    fraction = hits / cfg.samples
    stderr = box * math.sqrt(fraction * (1.0 - fraction) / cfg.samples) if hits else math.nan
    return McEstimate(box * fraction, stderr, cfg.samples, cfg.seed, hits)


####################
# TUBE SCALING     #
####################


@dataclass(frozen=True)
class KeyLemmaRow:
    """Tube volume ratio Lambda(V_{eps, rho R}) / Lambda(V_{eps, R}) with its expected values."""

    eps: float
    R: float
    rho: float
    ratio: float
    stderr: float
    expected_limit: float
    expected_exact: float
    samples: int
    seed: int
    hits_large: int
    hits_small: int


def key_lemma_ratio(eps: float, R: float, rho: float, cfg: McConfig | None = None) -> KeyLemmaRow:
    """
    Estimate the tube volume ratio on sl(2) with common random numbers.

    One uniform point u in [-1, 1]^3 is scaled to both boxes, so the ratio is rho^3 hits_large / hits_small and
    its standard error follows from the joint counts by the delta method. The limit as eps -> 0 is rho^(d/2) with
    d = 2; the exact finite-eps value comes from sl2_tube_volume.

    Raises:
        InvalidRadiusError: eps or R not positive, or rho < 1.
    """
    cfg = cfg or McConfig()
    if eps <= 0 or R <= 0 or rho < 1:
        raise InvalidRadiusError(f"Need eps, R > 0 and rho >= 1, got eps = {eps}, R = {R}, rho = {rho}.")
    if eps > R / 5:
        logger.warning("eps = %s is not small against R = %s, the tube is not thin", eps, R)

    def kernel(rng: np.random.Generator, size: int) -> np.ndarray:
        unit = rng.uniform(-1.0, 1.0, size=(size, 3))
        large = sl2_tube_mask(unit * (rho * R), eps, rho * R)
        small = sl2_tube_mask(unit * R, eps, R)
        return np.array([np.count_nonzero(large), np.count_nonzero(small), np.count_nonzero(large & small)])

    hits_large, hits_small, hits_both = run_batches(cfg, kernel)
    n = cfg.samples
    expected_exact = sl2_tube_volume(eps, rho * R) / sl2_tube_volume(eps, R)
    if hits_small == 0 or hits_large == 0:
        ratio, stderr = math.nan, math.nan
    else:
        a, b, c = hits_large / n, hits_small / n, hits_both / n
        ratio = rho**3 * a / b
        relative_variance = ((1 - a) / a + (1 - b) / b - 2.0 * (c - a * b) / (a * b)) / n
        stderr = ratio * math.sqrt(max(relative_variance, 0.0))
    logger.info("tube ratio eps=%s R=%s rho=%s: %.6f +- %.6f (exact %.6f)", eps, R, rho, ratio, stderr, expected_exact)
    return KeyLemmaRow(
        eps, R, rho, ratio, stderr, rho, expected_exact, n, cfg.seed, int(hits_large), int(hits_small)
    )


@dataclass(frozen=True)
class KeyLemmaSchedule:
    """Rows over a decreasing eps schedule with the smallest-eps value and a linear extrapolation to eps = 0."""

    rows: Tuple[KeyLemmaRow, ...]
    final: float
    extrapolated: float
    monotone: bool

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "eps": row.eps,
                    "R": row.R,
                    "rho": row.rho,
                    "estimate": row.ratio,
                    "stderr": row.stderr,
                    "expected_exact": row.expected_exact,
                    "samples": row.samples,
                    "seed": row.seed,
                }
                for row in self.rows
            ]
        )


def key_lemma_schedule(
    epsilons: Sequence[float], R: float, rho: float, cfg: McConfig | None = None
) -> KeyLemmaSchedule:
    """key_lemma_ratio along an eps schedule, reported from the largest to the smallest eps."""
    if not epsilons:
        raise InvalidRadiusError("The eps schedule is empty.")
    ordered = sorted(epsilons, reverse=True)
    rows = tuple(key_lemma_ratio(eps, R, rho, cfg) for eps in ordered)
    distances = [abs(row.ratio - rho) for row in rows]
    monotone = all(later <= earlier for earlier, later in zip(distances, distances[1:]))
    if len(rows) > 1:
        slope, intercept = np.polyfit([row.eps for row in rows], [row.ratio for row in rows], 1)
        extrapolated = float(intercept)
    else:
        extrapolated = rows[0].ratio
    return KeyLemmaSchedule(rows, rows[-1].ratio, extrapolated, monotone)


####################
# NEIGHBOURHOODS   #
####################


@dataclass(frozen=True)
class Neighbourhood:
    """
    A symmetric neighbourhood W of 0 in orthonormal coordinates.

    kind "ball" is the B-ball of radius R; kind "tube" is the sl(2) tube Ad_G(B_eps) cap B_R.
    """

    kind: str
    R: float
    eps: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("ball", "tube"):
            raise MalformedNeighbourhoodError(f"Unknown neighbourhood kind '{self.kind}'.")
        if self.R <= 0 or (self.kind == "tube" and self.eps <= 0):
            raise InvalidRadiusError(f"Neighbourhood radii must be positive: R = {self.R}, eps = {self.eps}.")

    @property
    def half_width(self) -> float:
        return self.R

    def contains(self, points: np.ndarray) -> np.ndarray:
        if self.kind == "ball":
            return np.sum(np.asarray(points) ** 2, axis=-1) < self.R**2
        return sl2_tube_mask(points, self.eps, self.R)


def parse_neighbourhood(spec: str) -> Neighbourhood:
    """"ball:R" or "tube:eps,R" """
    kind, _, argument = spec.strip().partition(":")
    try:
        values = [float(token) for token in argument.split(",") if token.strip()]
    except ValueError as error:
        raise MalformedNeighbourhoodError(f"Cannot parse neighbourhood '{spec}'.") from error
    if kind == "ball" and len(values) == 1:
        return Neighbourhood("ball", values[0])
    if kind == "tube" and len(values) == 2:
        return Neighbourhood("tube", values[1], values[0])
    raise MalformedNeighbourhoodError(f"Cannot parse neighbourhood '{spec}'.")


def _conjugated_logs_sl2(model: LieModel, coords: np.ndarray, s: GroupMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal coordinates of log(s^-1 exp(x) s) with the roundtrip mask, vectorised on sl(2)."""
    conjugated = s.inverse().mat @ sl2_exp(model.to_matrix(coords)) @ s.mat
    logs, ok = sl2_log(conjugated)
    return model.to_orthonormal(model.to_coords(logs)), ok


def _conjugated_logs_generic(model: LieModel, coords: np.ndarray, s: GroupMatrix) -> Tuple[np.ndarray, np.ndarray]:
    images = np.zeros_like(coords)
    ok = np.ones(len(coords), dtype=bool)
    inverse = s.inverse()
    for k, point in enumerate(coords):
        try:
            image = log_map(inverse @ exp_map(AlgebraVector(model, point)) @ s)
            images[k] = model.to_orthonormal(image.coords)
        except LogMapError:
            ok[k] = False
    return images, ok


def _densities(model: LieModel, coords: np.ndarray) -> np.ndarray:
    if model.name == "sl:2":
        return sl2_density(model.to_matrix(coords))
    return np.array([exp_density(AlgebraVector(model, point)) for point in coords])


def delta_mc(
    model: LieModel, F: Sequence[GroupMatrix], W: Neighbourhood, cfg: McConfig | None = None
) -> McEstimate:
    """
    delta_F(exp W) for the Haar measure, estimated in exponential coordinates.

    Points are drawn uniformly from the box around W, kept when they lie in W and weighted by the exponential
    density nu. A point survives when log(s^-1 exp(x) s) lies in W for every s in F. Points failing the
    exp/log roundtrip are rejected and counted.

    Raises:
        LogRoundtripError: more than 1% of the points in W fail the roundtrip.
    """
    cfg = cfg or McConfig()
    if W.kind == "tube" and model.name != "sl:2":
        raise MalformedNeighbourhoodError("Tube neighbourhoods are defined on sl(2).")
    conjugate_logs = _conjugated_logs_sl2 if model.name == "sl:2" else _conjugated_logs_generic

    def kernel(rng: np.random.Generator, size: int) -> np.ndarray:
        points = rng.uniform(-W.half_width, W.half_width, size=(size, model.dim))
        points = points[W.contains(points)]
        coords = model.from_orthonormal(points)
        survive = np.ones(len(points), dtype=bool)
        valid = np.ones(len(points), dtype=bool)
        for s in F:
            images, ok = conjugate_logs(model, coords, s)
            valid &= ok
            survive &= ok & W.contains(images)
        weights = _densities(model, coords)[valid]
        survive = survive[valid]
        return np.array(
            [
                np.sum(weights),
                np.sum(weights[survive]),
                np.sum(weights**2),
                np.sum(weights[survive] ** 2),
                np.count_nonzero(valid),
                np.count_nonzero(survive),
                np.count_nonzero(~valid),
            ]
        )

    total, kept, total_squares, kept_squares, accepted, hits, rejected = run_batches(cfg, kernel)
    if rejected > MAX_LOG_FAILURE_RATE * max(accepted + rejected, 1):
        raise LogRoundtripError(f"{int(rejected)} of {int(accepted + rejected)} samples failed the exp/log roundtrip.")
    if total == 0:
        return McEstimate(math.nan, math.nan, 0, cfg.seed, 0, int(rejected))
    value = kept / total
    variance = ((1 - value) ** 2 * kept_squares + value**2 * (total_squares - kept_squares)) / total**2
    logger.info("delta estimate %.6f +- %.6f from %d points", value, math.sqrt(variance), int(accepted))
    return McEstimate(float(value), math.sqrt(variance), int(accepted), cfg.seed, int(hits), int(rejected))


def delta_mc_finite(F: GroupSubset, V: GroupSubset, cfg: McConfig | None = None) -> McEstimate:
    """delta_F(V) on a finite group by sampling v uniformly from V and testing s^-1 v s in V for all s in F."""
    cfg = cfg or McConfig()
    require_same_group(F.parent, V.parent)
    group = V.parent
    inside = V.mask()
    members = V.array

    def kernel(rng: np.random.Generator, size: int) -> np.ndarray:
        v = members[rng.integers(0, members.size, size=size)]
        survive = np.ones(size, dtype=bool)
        for s in F.members:
            survive &= inside[group.mul[group.mul[group.inv[s], v], s]]
        return np.array([np.count_nonzero(survive)])

    hits = int(run_batches(cfg, kernel)[0])
    fraction = hits / cfg.samples
    return McEstimate(fraction, math.sqrt(fraction * (1 - fraction) / cfg.samples), cfg.samples, cfg.seed, hits)


####################
# LOWER BOUND      #
####################


def sample_adjoint_ball(rho: float, size: int, rng: np.random.Generator) -> List[GroupMatrix]:
    """k_1 diag(e^h, e^-h) k_2 with Haar rotations and h uniform in [0, log(rho) / 2], so ||Ad_g|| <= rho."""
    if rho < 1:
        raise InvalidRadiusError(f"Adjoint balls need rho >= 1, got {rho}.")
    model = build_model("sl:2")
    elements = []
    for _ in range(size):
        h = rng.uniform(0.0, math.log(rho) / 2.0)
        middle = np.diag([math.exp(h), math.exp(-h)])
        elements.append(GroupMatrix(model, random_rotation(2, rng) @ middle @ random_rotation(2, rng)))
    return elements


@dataclass
class LowerBoundCheck:
    """delta estimates along an eps schedule for one random F inside B_rho."""

    rho: float
    R: float
    estimates: Dict[float, McEstimate] = field(default_factory=dict)

    @property
    def bound(self) -> float:
        """rho^(-d/2) with d = 2"""
        return 1.0 / self.rho

    def to_report(self) -> ResidualReport:
        smallest = min(self.estimates)
        estimate = self.estimates[smallest]
        shortfall = max(0.0, self.bound - 3.0 * estimate.stderr - estimate.mean)
        return ResidualReport(
            "adjoint ball lower bound",
            shortfall,
            0.0,
            {"rho": self.rho, "R": self.R, "eps": smallest, "estimate": estimate.mean, "stderr": estimate.stderr},
        )


def lower_bound_consistency(
    rho: float, f_size: int, eps_schedule: Sequence[float], R: float, cfg: McConfig | None = None
) -> LowerBoundCheck:
    """
    delta_F(exp V_{eps, R}) for |F| = f_size random elements of B_rho in SL(2, R), compared with 1 / rho at the
    smallest eps. F is drawn from default_rng(seed).
    """
    cfg = cfg or McConfig()
    model = build_model("sl:2")
    F = sample_adjoint_ball(rho, f_size, np.random.default_rng(cfg.seed))
    check = LowerBoundCheck(rho, R)
    for eps in sorted(eps_schedule, reverse=True):
        check.estimates[eps] = delta_mc(model, F, Neighbourhood("tube", R, eps), cfg)
    return check


####################
# LATTICE COUNTING #
####################


def sl2z_count(rho: float) -> int:
    """
    Number of g in SL(2, Z) with ||Ad_g|| <= rho.

    ||Ad_g|| = sigma_1^2 and sigma_1^2 + sigma_1^-2 = a^2 + b^2 + c^2 + d^2, so the condition is
    a^2 + b^2 + c^2 + d^2 <= floor(rho + 1/rho).

    Raises:
        RadiusTooLargeError: rho > 10^4.
    """
    if rho > MAX_COUNT_RADIUS:
        raise RadiusTooLargeError(f"Counting radius {rho} exceeds {MAX_COUNT_RADIUS}.")
    if rho < 1:
        return 0
    bound = math.floor(rho + 1.0 / rho + 1e-12)
    # a = 0 forces bc = -1 and leaves d free
    count = 2 * (2 * math.isqrt(bound - 2) + 1)
    limit = math.isqrt(bound)
    entries = np.arange(-limit, limit + 1)
    b, c = np.meshgrid(entries, entries, indexing="ij")
    for a in range(-limit, limit + 1):
        if a == 0:
            continue
        numerator = 1 + b * c
        solvable = numerator % a == 0
        d = numerator // a
        count += int(np.count_nonzero(solvable & (a * a + b * b + c * c + d * d <= bound)))
    return count


def growth_fit(radii: Sequence[float], counts: Sequence[int], log_power: int = 1) -> Tuple[float, float]:
    """
    Least-squares slope of log(count / (log rho)^log_power) against log rho and the RMS residual.

    Raises:
        DegenerateSeriesError: fewer than five radii, less than a decade, radii <= 1 or nonpositive counts.
    """
    radii = np.asarray(radii, dtype=float)
    counts = np.asarray(counts, dtype=float)
    # 1. check the series
    if radii.size < 5 or radii.size != counts.size:
        raise DegenerateSeriesError("A growth fit needs at least five (radius, count) pairs.")
    if np.min(radii) <= 1 or np.max(radii) < 10 * np.min(radii):
        raise DegenerateSeriesError("Radii must exceed 1 and span a decade.")
    if np.any(counts <= 0):
        raise DegenerateSeriesError("Counts must be positive.")

    # 2. fit
    x = np.log(radii)
    y = np.log(counts) - log_power * np.log(np.log(radii))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), residual


@dataclass(frozen=True)
class CountSeries:
    """SL(2, Z) counts with the fitted growth exponent."""

    radii: Tuple[float, ...]
    counts: Tuple[int, ...]
    fitted_exponent: float
    fit_residual: float
    log_power: int = 1

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"rho": list(self.radii), "count": list(self.counts)})


def count_series(radii: Sequence[float], log_power: int = 1) -> CountSeries:
    """
    Raises:
        DegenerateSeriesError: counts decrease along increasing radii or the fit is degenerate.
    """
    ordered = sorted(radii)
    counts = [sl2z_count(rho) for rho in ordered]
    if any(later < earlier for earlier, later in zip(counts, counts[1:])):
        raise DegenerateSeriesError(f"Counts {counts} are not nondecreasing.")
    exponent, residual = growth_fit(ordered, counts, log_power)
    logger.info("growth exponent %.4f (log power %d, residual %.3e)", exponent, log_power, residual)
    return CountSeries(tuple(ordered), tuple(counts), exponent, residual, log_power)
