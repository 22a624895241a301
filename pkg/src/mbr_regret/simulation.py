"""Seeded regret sweeps, the bound crossover study and the MBR/MAP probe.

Each seed is an independent unit of work: it draws its own human
distribution and utility, trains one model per ``|D|``, and measures every
``n``, variant and ``delta`` on top of them. Seeds can run in a process
pool; rows are merged in ``(grid point, seed)`` order regardless of which
worker finishes first.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import structlog

from mbr_regret.bounds import (
    bound_difference,
    corollary_utility_matched,
    crossover_case2,
    crossover_case3,
    crossover_consistent,
    evaluate_bounds,
    lemma_kernel,
    map_bound_nd,
    theorem_bound,
)
from mbr_regret.config import config
from mbr_regret.decoding import TrialOutcome, TrialSpec, run_trial, train_model
from mbr_regret.errors import ExperimentConfigError
from mbr_regret.models import (
    BoundInputs,
    CostMode,
    CrossoverRow,
    ExperimentSpec,
    Observation1Row,
    SweepResult,
    SweepRow,
    UtilityKind,
)
from mbr_regret.space import Categorical, derive_seed, make_human_distribution
from mbr_regret.tools.report import summarize_rows
from mbr_regret.transport import wasserstein
from mbr_regret.utilities import (
    EmbeddingUtility,
    LipschitzCost,
    MatrixUtility,
    UtilityModel,
    build_utility,
    default_cost,
    perturb_embeddings,
    psd_project,
    symmetrize,
)

logger = structlog.get_logger(__name__)

# Sub-streams of a seed's root seed
_STREAM_HUMAN = 1
_STREAM_UTILITY = 2
_STREAM_TRAINING = 3
_STREAM_REFS = 4
_STREAM_NOISE = 5

# Seed index used for the shared human distribution in fixed-human mode
_FIXED_HUMAN_INDEX = (1 << 32) - 1


@dataclass(frozen=True)
class _SeedContext:
    """Per-seed objects shared by all grid points."""

    index: int
    root: int
    p_human: Categorical
    utility: UtilityModel
    cost: LipschitzCost | None
    kernel_cost: LipschitzCost | None


def _wd_enabled(spec: ExperimentSpec) -> bool:
    return spec.compute_wd and spec.space_size <= config.wd_size_limit


def _check_spec(spec: ExperimentSpec) -> None:
    if (
        _wd_enabled(spec)
        and spec.cost_mode == CostMode.TIGHTENED
        and spec.space_size > config.cost_size_limit
    ):
        raise ExperimentConfigError(
            f"cost matrix too large: space_size={spec.space_size} > "
            f"cost_size_limit={config.cost_size_limit}; use cost_mode = trivial"
        )


def _seed_context(spec: ExperimentSpec, index: int) -> _SeedContext:
    root = derive_seed(spec.master_seed, index)
    if spec.fixed_human:
        human_seed = derive_seed(derive_seed(spec.master_seed, _FIXED_HUMAN_INDEX), _STREAM_HUMAN)
    else:
        human_seed = derive_seed(root, _STREAM_HUMAN)
    p_human = make_human_distribution(spec.space_size, spec.human_family, human_seed)
    utility = build_utility(
        spec.utility_kind,
        p_human=p_human,
        dim=spec.dim,
        u_max=spec.u_max,
        beta=spec.beta,
        seed=derive_seed(root, _STREAM_UTILITY),
    )

    cost = kernel_cost = None
    if _wd_enabled(spec):
        cost = default_cost(utility, spec.cost_mode)
        if isinstance(utility, MatrixUtility):
            # The kernel bound is stated for the symmetric PSD repair of the matrix.
            if spec.cost_mode == CostMode.TRIVIAL:
                kernel_cost = cost
            else:
                kernel = psd_project(symmetrize(utility))
                kernel_cost = default_cost(kernel, spec.cost_mode)
    return _SeedContext(index, root, p_human, utility, cost, kernel_cost)


def _model_for(ctx: _SeedContext, d_size: int | None) -> Categorical:
    """Empirical model trained on ``d_size`` draws, or ``P_human`` itself when ``d_size`` is None."""
    if d_size is None:
        return ctx.p_human
    return train_model(ctx.p_human, d_size, derive_seed(ctx.root, _STREAM_TRAINING + 10 * d_size))


def _wd(nu: Categorical, mu: Categorical, cost: LipschitzCost | None) -> float | None:
    if cost is None:
        return None
    return wasserstein(nu, mu, cost).distance


def _bound_columns(
    spec: ExperimentSpec,
    outcome: TrialOutcome,
    d_size: int | None,
    delta: float,
    wd_hm: float | None,
    wd_kernel: float | None,
    wd_tt: float | None,
) -> dict:
    report = outcome.report
    inputs = BoundInputs(
        n=report.n,
        d_size=d_size,
        dim=spec.dim,
        delta=delta,
        wd_hm=wd_hm,
        wd_tt=wd_tt,
        u_max=spec.u_max,
        alpha_err=report.alpha_err,
    )
    bounds = evaluate_bounds(inputs)
    bound_mbr = bounds.value("theorem_bound")
    bound3 = bounds.value("theorem_bound3")
    bound_map = bounds.value("map_bound_nd")
    bound_map_n = bounds.value("map_bound_n")
    bound_utility = bounds.value("corollary_utility")
    bound_temperature = bounds.value("corollary_temperature")

    bound_kernel = None
    if spec.utility_kind == UtilityKind.APPENDIX_I_MATRIX and wd_kernel is not None:
        bound_kernel = lemma_kernel(report.n, delta) + 2.0 * wd_kernel

    bound_utility_matched = None
    if report.alpha_err_matched is not None and d_size is not None:
        bound_utility_matched = corollary_utility_matched(
            report.n, d_size, delta, report.alpha_err_matched
        )

    def exceeds(regret: float | None, bound: float | None) -> bool | None:
        if regret is None or bound is None:
            return None
        return regret > bound

    map_reference = bound_map if bound_map is not None else bound_map_n
    return {
        "bound_mbr": bound_mbr,
        "bound3": bound3,
        "bound_kernel": bound_kernel,
        "bound_map": bound_map,
        "bound_map_n": bound_map_n,
        "bound_utility": bound_utility,
        "bound_utility_matched": bound_utility_matched,
        "bound_temperature": bound_temperature,
        "violation_mbr": exceeds(report.regret_n, bound_mbr),
        "violation_bound3": exceeds(report.regret_n, bound3),
        "violation_map": exceeds(report.regret_map, map_reference),
        "violation_utility": exceeds(report.regret_u, bound_utility),
        "violation_temperature": exceeds(report.regret_t, bound_temperature),
    }


def _row(
    spec: ExperimentSpec,
    ctx: _SeedContext,
    outcome: TrialOutcome,
    d_size: int | None,
    delta: float,
    wd_hm: float | None,
    wd_kernel: float | None,
    wd_tt: float | None = None,
) -> SweepRow:
    report = outcome.report
    return SweepRow(
        seed=ctx.index,
        n=report.n,
        D=d_size,
        delta_config=delta,
        regret_n=report.regret_n,
        regret_map=report.regret_map,
        regret_u=report.regret_u,
        regret_t=report.regret_t,
        temperature=report.temperature,
        noise_scale=report.noise_scale,
        wd_hm=wd_hm,
        wd_skipped=wd_hm is None,
        wd_tt=wd_tt,
        alpha_err=report.alpha_err,
        mbr_vs_map_human=report.mbr_vs_map_human,
        mbr_vs_map_model=report.mbr_vs_map_model,
        map_vs_mbr_human=report.map_vs_mbr_human,
        map_vs_mbr_model=report.map_vs_mbr_model,
        **_bound_columns(spec, outcome, d_size, delta, wd_hm, wd_kernel, wd_tt),
    )


def _d_values(spec: ExperimentSpec) -> list[int | None]:
    return [None] if spec.human_as_model else list(spec.d_grid)


def _run_seed(spec: ExperimentSpec, index: int) -> list[tuple[tuple, SweepRow]]:
    """All rows of one seed, each keyed for the deterministic merge."""
    ctx = _seed_context(spec, index)
    proxies = []
    if spec.noise_scales:
        if not isinstance(ctx.utility, EmbeddingUtility):
            raise ExperimentConfigError("noise_scales require utility_kind = embedding")
        proxies = [
            perturb_embeddings(ctx.utility, scale, derive_seed(ctx.root, _STREAM_NOISE + 10 * k))
            for k, scale in enumerate(spec.noise_scales)
        ]

    keyed: list[tuple[tuple, SweepRow]] = []
    for d_pos, d_size in enumerate(_d_values(spec)):
        p_model = _model_for(ctx, d_size)
        wd_hm = _wd(ctx.p_human, p_model, ctx.cost)
        wd_kernel = _wd(ctx.p_human, p_model, ctx.kernel_cost)
        wd_tt_cache: dict[float, float | None] = {}

        for n_pos, n in enumerate(spec.n_grid):
            trial_seed = derive_seed(ctx.root, _STREAM_REFS + 10 * n)
            base = TrialSpec(
                p_human=ctx.p_human,
                utility=ctx.utility,
                n=n,
                seed=trial_seed,
                d_size=d_size,
                p_model=p_model,
                candidate_mode=spec.candidate_mode,
            )
            variants: list[tuple[TrialOutcome, float | None]] = [(run_trial(base), None)]
            for t in spec.temperatures or []:
                outcome = run_trial(replace(base, temperature=t))
                if t not in wd_tt_cache:
                    wd_tt_cache[t] = _wd(p_model, outcome.p_temperature, ctx.cost)
                variants.append((outcome, wd_tt_cache[t]))
            for proxy in proxies:
                variants.append((run_trial(replace(base, proxy=proxy)), None))

            for v_pos, (outcome, wd_tt) in enumerate(variants):
                for delta_pos, delta in enumerate(spec.deltas):
                    row = _row(spec, ctx, outcome, d_size, delta, wd_hm, wd_kernel, wd_tt)
                    keyed.append(((n_pos, d_pos, delta_pos, v_pos, index), row))

    logger.debug("seed_completed", seed=index, rows=len(keyed))
    return keyed


def _collect(spec: ExperimentSpec) -> list[SweepRow]:
    _check_spec(spec)
    keyed: list[tuple[tuple, SweepRow]] = []
    if spec.workers > 1 and spec.seeds > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_run_seed, spec, index) for index in range(spec.seeds)]
            for future in futures:
                keyed.extend(future.result())
    else:
        for index in range(spec.seeds):
            keyed.extend(_run_seed(spec, index))
    keyed.sort(key=lambda item: item[0])
    return [row for _, row in keyed]


def run_sweep(spec: ExperimentSpec) -> SweepResult:
    """Measure regrets and bounds over the grid for every seed.

    Args:
        spec: Grid, variants, seeds and worker count of the sweep.

    Returns:
        Rows in ``(grid point, seed)`` order and the per-point summary.

    Raises:
        ExperimentConfigError: If the tightened cost matrix would be too large.
    """
    logger.info(
        "sweep_started",
        space_size=spec.space_size,
        seeds=spec.seeds,
        n_grid=spec.n_grid,
        d_grid=None if spec.human_as_model else spec.d_grid,
        deltas=spec.deltas,
        workers=spec.workers,
    )
    if spec.compute_wd and not _wd_enabled(spec):
        logger.warning(
            "wasserstein_skipped", space_size=spec.space_size, limit=config.wd_size_limit
        )

    rows = _collect(spec)
    summary = summarize_rows(rows)
    logger.info("sweep_completed", rows=len(rows), points=len(summary))
    return SweepResult(spec=spec, rows=rows, summary=summary)


def run_crossover_study(spec: ExperimentSpec) -> list[CrossoverRow]:
    """Compare the MBR and MAP bounds with an empirical model over ``(n, |D|, delta)``."""
    rows = []
    for n in spec.n_grid:
        for d_size in spec.d_grid:
            for delta in spec.deltas:
                mbr = theorem_bound(n, d_size, spec.dim, delta)
                map_bound = map_bound_nd(n, d_size, delta)
                consistent = crossover_consistent(n, d_size, spec.dim, delta)
                if not consistent:
                    logger.warning("crossover_inconsistent", n=n, d_size=d_size, delta=delta)
                rows.append(
                    CrossoverRow(
                        n=n,
                        D=d_size,
                        dim=spec.dim,
                        delta=delta,
                        mbr_bound=mbr,
                        map_bound=map_bound,
                        difference=bound_difference(n, d_size, spec.dim, delta),
                        case2=crossover_case2(n, spec.dim, delta),
                        case3=crossover_case3(n, d_size, spec.dim, delta),
                        consistent=consistent,
                    )
                )
    logger.info("crossover_study_completed", points=len(rows))
    return rows


def observation1_rows(rows: list[SweepRow]) -> list[Observation1Row]:
    """MBR-vs-MAP quantities of the base rows (no variant, first delta)."""
    if not rows:
        return []
    first_delta = min(row.delta_config for row in rows)
    probe = []
    for row in rows:
        if row.delta_config != first_delta or row.temperature is not None or row.noise_scale is not None:
            continue
        probe.append(
            Observation1Row(
                seed=row.seed,
                n=row.n,
                D=row.D,
                mbr_vs_map_human=row.mbr_vs_map_human,
                mbr_vs_map_model=row.mbr_vs_map_model,
                gap=row.mbr_vs_map_human - row.mbr_vs_map_model,
                map_vs_mbr_human=row.map_vs_mbr_human,
                map_vs_mbr_model=row.map_vs_mbr_model,
                map_gap=row.map_vs_mbr_human - row.map_vs_mbr_model,
            )
        )
    return probe


def run_observation1_probe(spec: ExperimentSpec) -> list[Observation1Row]:
    """Per-seed ``u_h(y*) - u_h(h_MAP)`` against ``u_m(y_hat) - u_m(h_MAP)``, and the MAP direction."""
    probe_spec = spec.model_copy(
        update={
            "temperatures": None,
            "noise_scales": None,
            "deltas": spec.deltas[:1],
            "compute_wd": False,
        }
    )
    rows = observation1_rows(_collect(probe_spec))
    logger.info("observation1_probe_completed", rows=len(rows))
    return rows
