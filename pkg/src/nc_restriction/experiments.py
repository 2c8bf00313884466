"""
Experiments Module

One handler per command line experiment and the acceptance suites built from them. A handler takes a
resolved ExperimentConfig and returns its reports together with the table and JSON payload to write.

"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from nc_restriction.deleeuw_harness import (
    IDENTITY_TOLERANCE,
    DisjointnessError,
    delta_exact,
    dyadic_levels,
    embedding_contraction_residual,
    embedding_lower_residual,
    gram_matrix,
    lattice_maps_report,
    periodization_residual,
    random_gram_configurations,
    restriction_consistency,
    untestable_report,
)
from nc_restriction.experiment_config import ExperimentConfig, resolve_config
from nc_restriction.finite_groups import (
    FiniteGroup,
    build_group,
    group_to_json,
    identity_embedding,
    parse_subset,
    quotient_group,
    subgroup_embedding,
    word_ball,
    word_lengths,
)
from nc_restriction.group_algebra import random_element
from nc_restriction.lie_geometry import (
    AlgebraVector,
    UnsupportedModelError,
    ad_operator,
    adjoint_action,
    adjoint_norm,
    build_model,
    exp_density,
    load_group_matrices_csv,
    load_vectors_csv,
    max_nilpotent_dim,
    random_sl_element,
    split_rank_formula,
)
from nc_restriction.monte_carlo import (
    McConfig,
    count_series,
    delta_mc,
    delta_mc_finite,
    growth_fit,
    key_lemma_schedule,
    lower_bound_consistency,
    parse_neighbourhood,
    sample_adjoint_ball,
    sl2z_count,
)
from nc_restriction.multipliers import (
    consummation_residual,
    hertz_schur_transference_residual,
    load_symbol_csv,
    nested_residual,
    parse_symbol,
    random_symbol,
    transference_inputs,
    translation_residual,
)
from nc_restriction.norm_estimation import OptimizerConfig, duality_report, estimate_norm
from nc_restriction.reporting import ResidualReport, Timer, reports_frame

logger = logging.getLogger(__name__)

SMALL_GROUPS = (
    "cyclic:1",
    "cyclic:2",
    "cyclic:3",
    "cyclic:4",
    "cyclic:5",
    "cyclic:6",
    "cyclic:8",
    "cyclic:12",
    "dihedral:3",
    "dihedral:4",
    "dihedral:5",
    "dihedral:6",
    "heisenberg:2",
    "product:cyclic:2,cyclic:2",
    "product:cyclic:2,dihedral:3",
)

RESTRICTION_FIXTURES = (
    ("cyclic:12", "indices:0,3,6,9"),
    ("cyclic:8", "indices:0,2,4,6"),
    ("cyclic:6", "indices:0,2,4"),
    ("dihedral:6", "indices:0,2,4"),
    ("dihedral:6", "indices:0,6"),
    ("dihedral:4", "indices:0,1,2,3"),
    ("dihedral:3", "indices:0,1,2"),
)

PERIODIZATION_FIXTURES = (("cyclic:4", "indices:0,2"), ("dihedral:3", "indices:0,1,2"))

EXPECTED_NILPOTENT_DIMS = {"sl:2": 2, "sl:3": 6, "sl:4": 12, "sl:5": 20}

BRIDGE_STDERRS = 3.0

SUITE_SEED = 20240607


@dataclass
class CommandResult:
    """Reports of one experiment with the table and JSON payload it produced."""

    reports: List[ResidualReport] = field(default_factory=list)
    frame: pd.DataFrame | None = None
    payload: Dict[str, Any] | None = None
    message: str | None = None


@functools.lru_cache(maxsize=64)
def _group(descriptor: str) -> FiniteGroup:
    return build_group(descriptor)


def _exponents(exponents: Sequence[float] | None, arity: int, p: float) -> Tuple[float, ...]:
    """Given exponents, or n p in every slot so that the harmonic exponent is p."""
    return tuple(exponents) if exponents is not None else (p * arity,) * arity


def _small_groups(max_order: int) -> List[FiniteGroup]:
    return [group for group in map(_group, SMALL_GROUPS) if group.order <= max_order]


def _mc_config(parameters, seed: int) -> McConfig:
    return McConfig(samples=parameters.samples, seed=seed, batch=parameters.batch, workers=parameters.workers)


####################
# FINITE GROUPS    #
####################


def run_group(config: ExperimentConfig) -> CommandResult:
    """Element table of a group: order, inverse, centrality and word length of every element."""
    params = config.parameters
    group = _group(params.group)
    center = group.center().mask()
    frame = pd.DataFrame(
        {
            "element": np.arange(group.order),
            "inverse": group.inv,
            "element_order": [group.element_order(a) for a in range(group.order)],
            "central": center,
            "word_length": word_lengths(group),
        }
    )
    ball = word_ball(group, params.radius)
    message = (
        f"{group.label}: order {group.order}, abelian {group.is_abelian}, "
        f"word ball of radius {params.radius} has {ball.size} elements"
    )
    return CommandResult(frame=frame, payload=group_to_json(group), message=message)


def run_norm(config: ExperimentConfig) -> CommandResult:
    """Lower bound for the multiplier norm with its witness."""
    params = config.parameters
    group = _group(params.group)
    m = load_symbol_csv(group, params.symbol_csv) if params.symbol_csv else parse_symbol(group, params.symbol, params.arity)
    exponents = _exponents(params.exponents, m.arity, params.p)
    cfg = OptimizerConfig(
        restarts=params.restarts, max_iterations=params.max_iterations, seed=config.seed, workers=params.workers
    )
    with Timer("estimate_norm"):
        estimate = estimate_norm(m, exponents, params.p, cfg)
    frame = pd.DataFrame(
        [{"group": group.label, "p": params.p, "norm": estimate.value, "seed": config.seed, "converged": estimate.converged}]
    )
    payload = {**estimate.to_json(), "config": config.echo()}
    return CommandResult(frame=frame, payload=payload, message=f"norm >= {estimate.value:.12g}")


def identity_reports(params, seed: int) -> List[ResidualReport]:
    """Worst residual of each selected multiplier identity over random symbols on small groups."""
    rng = np.random.default_rng(seed)
    groups = _small_groups(params.max_order)
    selected = ("consummation", "translation", "nested") if params.identity == "all" else (params.identity,)
    names = {
        "consummation": "multiplier consummation identity",
        "translation": "multiplier translation identity",
        "nested": "nested multiplier identity",
    }
    reports = []
    for identity in selected:
        worst, worst_group = 0.0, None
        for index in range(params.configurations):
            group = groups[int(rng.integers(len(groups)))]
            n = int(rng.integers(2, params.max_arity + 1))
            trial_seed = int(rng.integers(2**32))
            if identity == "consummation":
                k = int(rng.integers(1, n + 1))
                indices = [1] + sorted(rng.choice(np.arange(2, n + 1), size=k - 1, replace=False).tolist())
                residual = consummation_residual(random_symbol(group, k, rng), indices, n, params.trials, trial_seed)
            elif identity == "translation":
                i = int(rng.integers(1, n))
                r, t, r_prime = (int(a) for a in rng.integers(group.order, size=3))
                residual = translation_residual(random_symbol(group, n, rng), i, r, t, r_prime, params.trials, trial_seed)
            else:
                symbols = [random_symbol(group, 1, rng) for _ in range(n)]
                residual = nested_residual(symbols, params.trials, trial_seed)
            logger.debug("%s configuration %d on %s: %.3e", identity, index, group.label, residual)
            if residual >= worst:
                worst, worst_group = residual, group.label
        reports.append(
            ResidualReport(
                names[identity],
                worst,
                IDENTITY_TOLERANCE,
                {"configurations": params.configurations, "worst_group": worst_group, "seed": seed},
            )
        )
    return reports


def run_identity_check(config: ExperimentConfig) -> CommandResult:
    reports = identity_reports(config.parameters, config.seed)
    return CommandResult(reports=reports, frame=reports_frame(reports))


def run_restrict(config: ExperimentConfig) -> CommandResult:
    """Restriction inequality for a symbol and a subgroup given by its members."""
    params = config.parameters
    group = _group(params.group)
    embedding = subgroup_embedding(group, parse_subset(group, params.subgroup).array)
    m = parse_symbol(group, params.symbol, params.arity)
    cfg = OptimizerConfig(restarts=params.restarts, seed=config.seed, workers=params.workers)
    report = restriction_consistency(embedding, m, _exponents(params.exponents, m.arity, params.p), params.p, cfg)
    return CommandResult(reports=[report], frame=reports_frame([report]))


def run_periodize(config: ExperimentConfig) -> CommandResult:
    params = config.parameters
    group = _group(params.group)
    qmap = quotient_group(group, parse_subset(group, params.normal).array)
    m_q = parse_symbol(qmap.quotient, params.symbol, params.arity)
    report = periodization_residual(qmap, m_q, params.trials, config.seed, params.exponents)
    return CommandResult(reports=[report], frame=reports_frame([report]))


def run_lattice_maps(config: ExperimentConfig) -> CommandResult:
    params = config.parameters
    group = _group(params.group)
    m = parse_symbol(group, params.symbol, params.arity)
    reports = lattice_maps_report(dyadic_levels(group, params.powers), m, params.exponents, params.trials, config.seed)
    return CommandResult(reports=reports, frame=reports_frame(reports))


def run_delta_exact(config: ExperimentConfig) -> CommandResult:
    """Exact delta_F(V) as a fraction."""
    params = config.parameters
    group = _group(params.group)
    value = delta_exact(parse_subset(group, params.F), parse_subset(group, params.V))
    row = {
        "group": group.label,
        "numerator": value.numerator,
        "denominator": value.denominator,
        "fraction": str(value.fraction),
        "value": value.value,
    }
    return CommandResult(frame=pd.DataFrame([row]), payload=row, message=f"delta_F(V) = {value.fraction}")


####################
# LIE GROUPS       #
####################


def run_delta_mc(config: ExperimentConfig) -> CommandResult:
    """
    Monte Carlo delta. With a finite group the estimate is compared with the exact count, otherwise F is read
    from a CSV of group matrices or drawn from an adjoint ball and compared with rho^(-d/2) on tube neighbourhoods.
    """
    params = config.parameters
    cfg = _mc_config(params, config.seed)
    if params.group is not None:
        group = _group(params.group)
        F = parse_subset(group, params.F or "identity")
        V = parse_subset(group, params.V or "all")
        estimate = delta_mc_finite(F, V, cfg)
        exact = delta_exact(F, V).value
        report = ResidualReport(
            "finite delta bridge",
            abs(estimate.mean - exact),
            max(BRIDGE_STDERRS * estimate.stderr, 1e-12),
            {"exact": exact, "estimate": estimate.mean, "stderr": estimate.stderr},
        )
        row = {"group": group.label, "estimate": estimate.mean, "stderr": estimate.stderr, "exact": exact}
    else:
        model = build_model(params.model)
        if params.matrices is not None:
            F = load_group_matrices_csv(model, params.matrices)
            rho = max(adjoint_norm(g) for g in F)
        elif model.name == "sl:2":
            F = sample_adjoint_ball(params.rho, params.f_size, np.random.default_rng(config.seed))
            rho = params.rho
        else:
            raise UnsupportedModelError("Random adjoint balls are sampled in SL(2, R); pass matrices for other models.")
        neighbourhood = parse_neighbourhood(params.neighbourhood)
        estimate = delta_mc(model, F, neighbourhood, cfg)
        row = {"model": model.name, "neighbourhood": params.neighbourhood, "rho": rho}
        row.update({"estimate": estimate.mean, "stderr": estimate.stderr, "rejected": estimate.rejected})
        if neighbourhood.kind == "tube" and model.reductive:
            bound = rho ** (-split_rank_formula(model) / 2.0)
            report = ResidualReport(
                "adjoint ball lower bound",
                max(0.0, bound - 3.0 * estimate.stderr - estimate.mean),
                0.0,
                {"rho": rho, "bound": bound, "estimate": estimate.mean, "stderr": estimate.stderr},
            )
        else:
            report = None
    row.update({"samples": estimate.samples, "seed": estimate.seed, "hits": estimate.hits})
    reports = [report] if report is not None else []
    return CommandResult(reports=reports, frame=pd.DataFrame([row]))


def key_lemma_reports(rho: float, R: float, epsilons: Sequence[float], cfg: McConfig, tolerance: float = 0.1):
    """Scaling ratio of the nilpotent tube along the schedule, as reports and a table."""
    schedule = key_lemma_schedule(epsilons, R, rho, cfg)
    context = {"rho": rho, "R": R, "final": schedule.final, "extrapolated": schedule.extrapolated}
    reports = [
        ResidualReport("nilpotent-tube scaling", abs(schedule.final - rho) / rho, tolerance, context),
        ResidualReport("nilpotent-tube monotone approach", 0.0 if schedule.monotone else 1.0, 0.0, {"rho": rho}),
    ]
    return reports, schedule.to_frame()


def run_key_lemma(config: ExperimentConfig) -> CommandResult:
    params = config.parameters
    reports, frame = key_lemma_reports(params.rho, params.R, params.eps, _mc_config(params, config.seed), params.tolerance)
    return CommandResult(reports=reports, frame=frame)


def orbit_dim_reports(models: Sequence[str], samples: int, seed: int):
    reports, rows = [], []
    for name in models:
        model = build_model(name)
        result = max_nilpotent_dim(model, samples, seed)
        rows.append({"model": name, "d": result.d, "sweep_max": result.sweep_max, "samples": result.samples})
        if result.d is None:
            reports.append(untestable_report("nilpotent orbit dimension", result.note))
            continue
        expected = EXPECTED_NILPOTENT_DIMS.get(name, split_rank_formula(model))
        reports.append(
            ResidualReport(
                "nilpotent orbit dimension",
                float(abs(result.d - expected)),
                0.0,
                {"model": name, "d": result.d, "expected": expected, "sweep_max": result.sweep_max},
            )
        )
    return reports, pd.DataFrame(rows)


def run_orbit_dim(config: ExperimentConfig) -> CommandResult:
    params = config.parameters
    reports, frame = orbit_dim_reports(params.models, params.samples, config.seed)
    return CommandResult(reports=reports, frame=frame)


def lattice_count_reports(radii: Sequence[float], log_power: int = 0, tolerance: float = 0.15):
    """Growth exponent of SL(2, Z) counts in adjoint balls, with the log-corrected fit as context."""
    series = count_series(radii, log_power)
    corrected, _ = growth_fit(series.radii, series.counts, 1)
    near_identity = sl2z_count(1.0 + 1e-9)
    reports = [
        ResidualReport(
            "lattice growth exponent",
            abs(series.fitted_exponent - 1.0),
            tolerance,
            {
                "exponent": series.fitted_exponent,
                "log_power": log_power,
                "log_corrected_exponent": corrected,
                "fit_residual": series.fit_residual,
            },
        ),
        ResidualReport("lattice count near identity", float(abs(near_identity - 4)), 0.0, {"count": near_identity}),
    ]
    return reports, series.to_frame()


def run_lattice_count(config: ExperimentConfig) -> CommandResult:
    params = config.parameters
    reports, frame = lattice_count_reports(params.radii, params.log_power, params.tolerance)
    return CommandResult(reports=reports, frame=frame)


def _bounded_points(model, count: int, max_ad: float, rng: np.random.Generator) -> List[AlgebraVector]:
    """Random algebra vectors with operator norm of ad_x at most max_ad."""
    points = []
    for _ in range(count):
        x = AlgebraVector(model, model.from_orthonormal(rng.standard_normal(model.dim)))
        size = np.linalg.norm(ad_operator(x), 2)
        scale = rng.uniform(0.0, max_ad) / size if size > 0 else 0.0
        points.append(AlgebraVector(model, x.coords * scale))
    return points


def density_reports(params, seed: int):
    """Both evaluation paths of the exponential density, its conjugation invariance and the sl(2) closed form."""
    rng = np.random.default_rng(seed)
    reports, rows = [], []
    for index, name in enumerate(params.models):
        model = build_model(name)
        if index == 0 and params.vectors is not None:
            points = load_vectors_csv(model, params.vectors)
        else:
            points = _bounded_points(model, params.points, params.max_ad, rng)
        paths = invariance = 0.0
        for x in points:
            eigen = exp_density(x)
            series = exp_density(x, params.series_terms, "series")
            conjugated = exp_density(adjoint_action(random_sl_element(model, rng, max_log=0.5), x))
            paths = max(paths, abs(eigen - series))
            invariance = max(invariance, abs(conjugated - eigen))
            rows.append({"model": name, "ad_norm": float(np.linalg.norm(ad_operator(x), 2)), "eigen": eigen, "series": series})
        zero = abs(exp_density(AlgebraVector(model, np.zeros(model.dim))) - 1.0)
        reports.append(ResidualReport("exponential density paths", paths, 1e-8, {"model": name, "points": len(points)}))
        reports.append(ResidualReport("exponential density conjugation invariance", invariance, 1e-7, {"model": name}))
        reports.append(ResidualReport("exponential density at zero", zero, 0.0, {"model": name}))
        if name == "sl:2":
            closed = max(
                abs(exp_density(AlgebraVector(model, np.array([t, 0.0, 0.0]))) - (math.sinh(t) / t) ** 2)
                for t in (0.1, 1.0, 2.0)
            )
            reports.append(ResidualReport("exponential density closed form", closed, 1e-10, {"model": name}))
    return reports, pd.DataFrame(rows)


def run_density(config: ExperimentConfig) -> CommandResult:
    reports, frame = density_reports(config.parameters, config.seed)
    return CommandResult(reports=reports, frame=frame)


def transference_reports(params, seed: int):
    """Transference residuals along the Folner radii, relative residual at the largest and monotonicity."""
    group = _group(f"cyclic:{params.order}")
    m, x, y, z = transference_inputs(group, params.radius, seed, params.width)
    results = [hertz_schur_transference_residual(m, alpha, params.p1, params.p2, x, y, z) for alpha in sorted(params.alphas)]
    frame = pd.DataFrame([{"alpha": r.alpha, "absolute": r.absolute, "relative": r.relative} for r in results])
    increases = sum(later.relative > earlier.relative for earlier, later in zip(results, results[1:]))
    reports = [
        ResidualReport(
            "bilinear transference",
            results[-1].relative,
            params.tolerance,
            {"alpha": results[-1].alpha, "order": params.order, "absolute": results[-1].absolute},
        ),
        ResidualReport("bilinear transference monotone", float(increases), 0.0, {"alphas": list(params.alphas)}),
    ]
    return reports, frame


def run_transference(config: ExperimentConfig) -> CommandResult:
    reports, frame = transference_reports(config.parameters, config.seed)
    return CommandResult(reports=reports, frame=frame)


HANDLERS: Dict[str, Callable[[ExperimentConfig], CommandResult]] = {
    "group": run_group,
    "norm": run_norm,
    "identity-check": run_identity_check,
    "restrict": run_restrict,
    "periodize": run_periodize,
    "lattice-maps": run_lattice_maps,
    "delta-exact": run_delta_exact,
    "delta-mc": run_delta_mc,
    "key-lemma": run_key_lemma,
    "orbit-dim": run_orbit_dim,
    "lattice-count": run_lattice_count,
    "density": run_density,
    "transference": run_transference,
}


def execute(config: ExperimentConfig) -> CommandResult:
    """Run the handler of the configured command and log every checked statement."""
    with Timer(config.command):
        result = HANDLERS[config.command](config)
    for report in result.reports:
        logger.info(
            "%s: residual %s tolerance %s pass %s", report.name, report.residual, report.tolerance, report.passed
        )
    return result


####################
# SUITES           #
####################


def _guarded(name: str, check: Callable[[], ResidualReport]) -> ResidualReport:
    try:
        return check()
    except DisjointnessError as error:
        return untestable_report(name, str(error))


def lemmas_suite(seed: int = SUITE_SEED) -> List[ResidualReport]:
    """Exact finite checks: multiplier identities, overlap matrices, local embeddings, periodization, lattice maps."""
    reports = identity_reports(resolve_config("identity-check").parameters, seed)

    # overlap matrices over the random sweep, worst configuration reported
    gram = [gram_matrix(F, V).to_report() for F, V in random_gram_configurations(seed, 500)]
    worst = max(gram, key=lambda report: report.residual)
    worst.context["configurations"] = len(gram)
    reports.append(worst)

    dihedral = _group("dihedral:6")
    value = delta_exact(parse_subset(dihedral, "indices:6"), parse_subset(dihedral, "indices:0,1,5,7"))
    reports.append(
        ResidualReport("dihedral almost invariance", abs(value.value - 0.75), 0.0, {"delta": str(value.fraction)})
    )

    rng = np.random.default_rng(seed)
    embedding = identity_embedding(dihedral)
    V = parse_subset(dihedral, "indices:0,6,9")
    for p in (1.0, 1.5, 2.0, 3.0, 4.0, math.inf):
        x = random_element(dihedral, rng, support=(0, 1, 2))
        reports.append(_guarded("local embedding contraction", lambda: embedding_contraction_residual(embedding, x, V, p)))

    larger = _group("dihedral:12")
    lattice = subgroup_embedding(larger, (0, 12))
    W = parse_subset(larger, "indices:0,1,11,15")
    for p in (3.0, 4.0, 6.0):
        x = random_element(lattice.sub, rng)
        reports.append(_guarded("local embedding lower bound", lambda: embedding_lower_residual(lattice, x, W, p)))

    for descriptor, normal in PERIODIZATION_FIXTURES:
        group = _group(descriptor)
        qmap = quotient_group(group, parse_subset(group, normal).array)
        for arity in (1, 2):
            reports.append(periodization_residual(qmap, random_symbol(qmap.quotient, arity, rng), 10, seed))

    cyclic = _group("cyclic:64")
    reports.extend(lattice_maps_report(dyadic_levels(cyclic, (3, 2, 1)), parse_symbol(cyclic, "vonmises:2", 2)))
    return reports


def restriction_suite(seed: int = SUITE_SEED, restarts: int = 200) -> List[ResidualReport]:
    """Finite restriction inequality, exact L_2 multiplier norms, transference and duality."""
    rng = np.random.default_rng(seed)
    cfg = OptimizerConfig(restarts=restarts, seed=seed)
    reports = []
    for index in range(20):
        descriptor, members = RESTRICTION_FIXTURES[index % len(RESTRICTION_FIXTURES)]
        group = _group(descriptor)
        embedding = subgroup_embedding(group, parse_subset(group, members).array)
        p = (1.5, 3.0, 4.0)[index % 3]
        m = parse_symbol(group, f"positive:{int(rng.integers(2**32))}")
        reports.append(restriction_consistency(embedding, m, (p,), p, cfg))

    worst = 0.0
    groups = _small_groups(24)
    for _ in range(100):
        group = groups[int(rng.integers(len(groups)))]
        m = random_symbol(group, 1, rng)
        worst = max(worst, abs(estimate_norm(m, (2.0,), 2.0).value - float(np.max(np.abs(m.values)))))
    reports.append(ResidualReport("linear L2 multiplier norm", worst, 1e-10, {"symbols": 100}))

    transference, _ = transference_reports(resolve_config("transference").parameters, seed)
    reports.extend(transference)
    reports.append(duality_report(parse_symbol(_group("dihedral:3"), f"random:{seed}"), 3.0, cfg))
    return reports


def lower_bound_suite(seed: int = SUITE_SEED, samples: int = 10_000_000) -> List[ResidualReport]:
    """Nilpotent dimensions, tube scaling, adjoint ball lower bound, density, lattice counts and the MC bridge."""
    reports, _ = orbit_dim_reports(("sl:2", "sl:3", "sl:4", "sl:5"), 1000, seed)
    for rho in (2.0, 4.0):
        scaling, _ = key_lemma_reports(rho, 0.5, (0.1, 0.05, 0.025), McConfig(samples=samples, seed=seed))
        reports.extend(scaling)

    for rho in (2.0, 4.0):
        checks = [
            lower_bound_consistency(rho, 3, (0.1, 0.05, 0.025), 0.5, McConfig(samples=1_000_000, seed=seed + k))
            for k in range(10)
        ]
        violations = [report for report in (check.to_report() for check in checks) if not report.passed]
        reports.append(
            ResidualReport("adjoint ball lower bound", float(len(violations)), 0.0, {"rho": rho, "seeds": len(checks)})
        )

    density, _ = density_reports(resolve_config("density").parameters, seed)
    reports.extend(density)
    counts, _ = lattice_count_reports((100.0, 250.0, 500.0, 1000.0, 2500.0))
    reports.extend(counts)

    misses = 0
    for F, V in random_gram_configurations(seed, 50):
        estimate = delta_mc_finite(F, V, McConfig(samples=20_000, seed=seed))
        misses += abs(estimate.mean - delta_exact(F, V).value) > BRIDGE_STDERRS * estimate.stderr + 1e-12
    reports.append(ResidualReport("finite delta bridge", float(misses), 0.0, {"configurations": 50}))
    return reports


def all_suite(seed: int = SUITE_SEED) -> List[ResidualReport]:
    return lemmas_suite(seed) + restriction_suite(seed) + lower_bound_suite(seed)


SUITES: Dict[str, Callable[[int], List[ResidualReport]]] = {
    "lemmas": lemmas_suite,
    "theoremA": restriction_suite,
    "theoremB": lower_bound_suite,
    "all": all_suite,
    "restriction": restriction_suite,
    "lower-bound": lower_bound_suite,
}
