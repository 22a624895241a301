"""MBR and MAP decoders and the regret measurements comparing them.

Ground-truth quantities (``u_h``, ``P_human``) are always evaluated exactly
over the full hypothesis space; only the decoders themselves see samples.
Ties are broken toward the lowest hypothesis index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import structlog

from mbr_regret.errors import DecodingError
from mbr_regret.models import CandidateMode, DecodeResult, Objective, RegretReport
from mbr_regret.space import (
    Categorical,
    SampleSet,
    derive_seed,
    empirical_distribution,
    sample,
    temperature_transform,
)
from mbr_regret.utilities.base import UtilityModel
from mbr_regret.utilities.embedding import PerturbedUtility

logger = structlog.get_logger(__name__)

# Sub-stream indices derived from a trial seed
_STREAM_TRAINING = 0
_STREAM_REFS = 1
_STREAM_TEMPERATURE = 2


def _check_space(utility: UtilityModel, size: int) -> None:
    if utility.size != size:
        raise DecodingError(
            f"space mismatch: utility has {utility.size} hypotheses, distribution has {size}"
        )


def _check_target(utility: UtilityModel, target: int) -> int:
    if not 0 <= int(target) < utility.size:
        raise DecodingError(f"index {target} out of range for space of size {utility.size}")
    return int(target)


def _check_refs(refs: SampleSet) -> None:
    if len(refs) == 0:
        raise DecodingError("empty reference set")


def expected_utilities(utility: UtilityModel, dist: Categorical) -> np.ndarray:
    """``sum_{y2} u(y, y2) P(y2)`` for every ``y``."""
    _check_space(utility, dist.space.size)
    return utility.matrix @ dist.probs


def expected_utility(target: int, utility: UtilityModel, dist: Categorical) -> float:
    """Exact expected utility of one hypothesis under ``dist``."""
    _check_space(utility, dist.space.size)
    target = _check_target(utility, target)
    return float(utility.matrix[target] @ dist.probs)


def mc_expected_utility(target: int, utility: UtilityModel, refs: SampleSet) -> float:
    """Mean utility of ``target`` against the references, with multiplicity."""
    _check_refs(refs)
    _check_space(utility, refs.space.size)
    target = _check_target(utility, target)
    return float(utility.matrix[target, refs.indices].mean())


def mbr_decode_exact(
    utility: UtilityModel, dist: Categorical, objective: Objective = Objective.U_H
) -> DecodeResult:
    """Argmax of the exact expected utility over the full space."""
    scores = expected_utilities(utility, dist)
    chosen = int(np.argmax(scores))
    return DecodeResult(chosen=chosen, score=float(scores[chosen]), objective=objective)


def mbr_decode_mc(
    utility: UtilityModel,
    refs: SampleSet,
    candidate_mode: CandidateMode = CandidateMode.REFS,
    objective: Objective = Objective.U_HAT_M,
) -> DecodeResult:
    """Argmax of the Monte Carlo expected utility.

    Candidates are the distinct sampled hypotheses (``refs``) or, for
    ablations, the whole space (``full``).
    """
    _check_refs(refs)
    _check_space(utility, refs.space.size)

    if CandidateMode(candidate_mode) == CandidateMode.REFS:
        candidates = refs.distinct
    else:
        candidates = np.arange(utility.size)
    scores = utility.matrix[candidates] @ refs.counts / len(refs)
    best = int(np.argmax(scores))
    return DecodeResult(chosen=int(candidates[best]), score=float(scores[best]), objective=objective)


def map_decode(
    source: Categorical | SampleSet, objective: Objective | None = None
) -> DecodeResult:
    """Mode of a distribution, or of the empirical frequencies of a sample."""
    if isinstance(source, SampleSet):
        if len(source) == 0:
            raise DecodingError("empty reference set")
        probs = empirical_distribution(source).probs
        objective = objective or Objective.P_HAT
    else:
        probs = source.probs
        objective = objective or Objective.P_MODEL
    chosen = int(np.argmax(probs))
    return DecodeResult(chosen=chosen, score=float(probs[chosen]), objective=objective)


@dataclass(frozen=True)
class TrialSpec:
    """Inputs of one regret trial.

    The model is ``p_model`` when given, otherwise the empirical distribution
    of ``d_size`` draws from ``p_human``. A given model may still carry the
    ``d_size`` it was trained on, which is then only recorded.
    """

    p_human: Categorical
    utility: UtilityModel
    n: int
    seed: int
    d_size: int | None = None
    p_model: Categorical | None = None
    temperature: float | None = None
    proxy: PerturbedUtility | None = None
    candidate_mode: CandidateMode = CandidateMode.REFS


@dataclass(frozen=True)
class TrialOutcome:
    """Regret report plus the intermediate distributions a sweep needs."""

    report: RegretReport
    p_model: Categorical
    refs: SampleSet
    p_temperature: Categorical | None = None


def train_model(p_human: Categorical, d_size: int, seed: int) -> Categorical:
    """Empirical model from ``d_size`` draws of ``p_human`` on the training stream of ``seed``."""
    training = sample(p_human, d_size, derive_seed(seed, _STREAM_TRAINING))
    return empirical_distribution(training)


def _build_model(trial: TrialSpec) -> Categorical:
    if trial.p_model is None and trial.d_size is None:
        raise DecodingError("Trial needs p_model or d_size")
    if trial.p_model is not None:
        _check_space(trial.utility, trial.p_model.space.size)
        return trial.p_model
    return train_model(trial.p_human, trial.d_size, trial.seed)


def run_trial(trial: TrialSpec) -> TrialOutcome:
    """Sample, decode every variant and measure regrets under ``u_h`` and ``P_human``.

    Args:
        trial: Distributions, utility, sample size and seed of the trial.

    Returns:
        The regret report with the model and reference sample it was measured on.

    Raises:
        DecodingError: If ``n`` is less than 1, no model can be built, or the
            spaces disagree.
    """
    if trial.n < 1:
        raise DecodingError("empty sample request")
    _check_space(trial.utility, trial.p_human.space.size)

    p_model = _build_model(trial)
    refs = sample(p_model, trial.n, derive_seed(trial.seed, _STREAM_REFS))

    u_h = expected_utilities(trial.utility, trial.p_human)
    u_m = expected_utilities(trial.utility, p_model)
    p_h = trial.p_human.probs

    y_star = int(np.argmax(u_h))
    y_hat = mbr_decode_mc(trial.utility, refs, trial.candidate_mode).chosen
    map_star = int(np.argmax(p_h))
    map_hat = map_decode(refs).chosen

    regret_u = alpha_err = alpha_err_matched = None
    if trial.proxy is not None:
        _check_space(trial.proxy, trial.p_human.space.size)
        y_proxy = mbr_decode_mc(
            trial.proxy, refs, trial.candidate_mode, objective=Objective.U_PRIME
        ).chosen
        regret_u = float(u_h[y_star] - u_h[y_proxy])
        alpha_err = trial.proxy.alpha_err
        alpha_err_matched = trial.proxy.matched_error(y_star) + trial.proxy.matched_error(y_proxy)

    regret_t = None
    p_temperature = None
    if trial.temperature is not None:
        p_temperature = temperature_transform(p_model, trial.temperature)
        refs_t = sample(p_temperature, trial.n, derive_seed(trial.seed, _STREAM_TEMPERATURE))
        y_t = mbr_decode_mc(
            trial.utility, refs_t, trial.candidate_mode, objective=Objective.U_HAT_M_T
        ).chosen
        regret_t = float(u_h[y_star] - u_h[y_t])

    report = RegretReport(
        seed=trial.seed,
        n=trial.n,
        d_size=trial.d_size,
        regret_n=float(u_h[y_star] - u_h[y_hat]),
        regret_map=float(p_h[map_star] - p_h[map_hat]),
        regret_u=regret_u,
        regret_t=regret_t,
        temperature=trial.temperature,
        noise_scale=trial.proxy.noise_scale if trial.proxy is not None else None,
        y_star=y_star,
        y_hat=y_hat,
        map_star=map_star,
        map_hat=map_hat,
        mbr_vs_map_human=float(u_h[y_star] - u_h[map_hat]),
        mbr_vs_map_model=float(u_m[y_hat] - u_m[map_hat]),
        map_vs_mbr_human=float(p_h[map_star] - p_h[y_hat]),
        map_vs_mbr_model=float(p_model.probs[map_hat] - p_model.probs[y_hat]),
        alpha_err=alpha_err,
        alpha_err_matched=alpha_err_matched,
    )
    logger.debug("trial_measured", seed=trial.seed, n=trial.n, regret_n=report.regret_n)
    return TrialOutcome(report=report, p_model=p_model, refs=refs, p_temperature=p_temperature)


def measure_regret(trial: TrialSpec) -> RegretReport:
    """Run the full decoding pipeline of one trial."""
    return run_trial(trial).report
