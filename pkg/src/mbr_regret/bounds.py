"""Closed-form regret upper bounds and the MBR/MAP crossover predicates.

Every bound is a sum of labelled additive terms. The public functions return
the total; :func:`evaluate_bounds` returns the full breakdown for every bound
whose inputs are available. Logarithms are natural.
"""

from __future__ import annotations

import math
from collections.abc import Callable

import structlog

from mbr_regret.errors import BoundInputError
from mbr_regret.models import BoundInputs, BoundReport, BoundTerm, BoundValue

logger = structlog.get_logger(__name__)

CROSSOVER_TOL = 1e-12

Terms = list[tuple[str, float]]


def _check_delta(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise BoundInputError("delta must be in (0,1)")
    return float(delta)


def _check_count(name: str, value: int | None) -> int:
    if value is None:
        raise BoundInputError(f"requires {name}")
    if value < 1:
        raise BoundInputError(f"{name} must be >= 1, got {value}")
    return int(value)


def _check_nonnegative(name: str, value: float | None) -> float:
    if value is None:
        raise BoundInputError(f"requires {name}")
    if value < 0:
        raise BoundInputError(f"{name} must be nonnegative, got {value}")
    return float(value)


def _root(count: int, delta: float, scale: float = 1.0) -> float:
    """``sqrt(log(scale / delta) / count)``."""
    return math.sqrt(math.log(scale / delta) / count)


def _dim_term(n: int, dim: int) -> float:
    """``(36 / n) sqrt(d log d)``."""
    return 36.0 / n * math.sqrt(dim * math.log(dim))


def _total(terms: Terms) -> float:
    return sum(value for _, value in terms)


# Term builders -------------------------------------------------------------


def _heart_terms(n: int, dim: int, delta: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    if dim < 4:
        raise BoundInputError(f"lemma_heart requires dim >= 4, got {dim}; use lemma_heart_smalld")
    return [("sample_n", 3.0 * _root(n, delta)), ("dimension", _dim_term(n, dim))]


def _heart_smalld_terms(n: int, dim: int, delta: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    dim = _check_count("dim", dim)
    if dim >= 4:
        raise BoundInputError(f"lemma_heart_smalld requires dim < 4, got {dim}; use lemma_heart")
    return [("sample_n", 3.0 * _root(n, delta)), ("dimension", 72.0 * math.sqrt(dim) / n)]


def _kernel_terms(n: int, delta: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    return [("sample_n", 3.0 * _root(n, delta)), ("kernel", 2.0 / math.sqrt(n))]


def _wd_terms(wd_hm: float | None) -> Terms:
    return [("wasserstein", 2.0 * _check_nonnegative("wd_hm", wd_hm))]


def _black_terms(d_size: int | None, delta: float) -> Terms:
    d_size, delta = _check_count("D", d_size), _check_delta(delta)
    return [("sample_D", 3.0 * _root(d_size, delta))]


def _bound3_terms(n: int, dim: int, delta: float, wd_hm: float | None) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    dim = _check_count("dim", dim)
    return [
        ("sample_n", 3.0 * _root(n, delta)),
        ("dimension", _dim_term(n, dim)),
        *_wd_terms(wd_hm),
    ]


def _bound_terms(n: int, d_size: int | None, dim: int, delta: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    d_size, dim = _check_count("D", d_size), _check_count("dim", dim)
    return [
        ("sample_n", 4.0 * _root(n, delta)),
        ("sample_D", 4.0 * _root(d_size, delta)),
        ("dimension", _dim_term(n, dim)),
    ]


def _utility_terms(
    n: int, d_size: int | None, dim: int, delta: float, alpha_err: float | None
) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    d_size, dim = _check_count("D", d_size), _check_count("dim", dim)
    return [
        ("sample_n", 4.0 * _root(n, delta)),
        ("sample_D", 4.0 * _root(d_size, delta)),
        ("utility_error", 2.0 * dim * _check_nonnegative("alpha_err", alpha_err)),
    ]


def _utility_matched_terms(
    n: int, d_size: int | None, delta: float, matched_error: float | None
) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    d_size = _check_count("D", d_size)
    return [
        ("sample_n", 4.0 * _root(n, delta)),
        ("sample_D", 4.0 * _root(d_size, delta)),
        ("utility_error", _check_nonnegative("alpha_err_matched", matched_error)),
    ]


def _temperature_terms(
    n: int, d_size: int | None, dim: int, delta: float, wd_tt: float | None
) -> Terms:
    return [*_bound_terms(n, d_size, dim, delta), ("temperature", _check_nonnegative("wd_tt", wd_tt))]


def _map_n_terms(n: int, delta: float, wd_hm: float | None) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    return [("sample_n", 6.0 * _root(n, delta)), *_wd_terms(wd_hm)]


def _map_nd_terms(n: int, d_size: int | None, delta: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    d_size = _check_count("D", d_size)
    return [("sample_n", 8.0 * _root(n, delta)), ("sample_D", 8.0 * _root(d_size, delta))]


def _mbr_corollary_terms(n: int, d_size: int | None, dim: int, delta: float) -> Terms:
    return [*_bound_terms(n, d_size, dim, delta), ("failure", _check_delta(delta))]


# Pre-simplification forms, explicit in u_max.


def _half_root(count: int, delta: float, scale: float) -> float:
    """``sqrt(log(scale / delta) / (2 count))``."""
    return math.sqrt(math.log(scale / delta) / (2.0 * count))


def _raw_dim_term(n: int, dim: int, u_max: float) -> float:
    return 12.0 * u_max / n * (math.sqrt(dim * math.log(2.0 * math.sqrt(dim))) + 2.0 * math.sqrt(dim))


def _heart_raw_terms(n: int, dim: int, delta: float, u_max: float) -> Terms:
    n, delta, dim = _check_count("n", n), _check_delta(delta), _check_count("dim", dim)
    return [
        ("sample_n", 2.0 * u_max * _half_root(n, delta, 4.0)),
        ("dimension", _raw_dim_term(n, dim, u_max)),
    ]


def _equal_distribution_raw_terms(n: int, dim: int, delta: float, u_max: float) -> Terms:
    n, delta, dim = _check_count("n", n), _check_delta(delta), _check_count("dim", dim)
    return [
        ("sample_n", 2.0 * u_max * _half_root(n, delta, 8.0)),
        ("dimension", _raw_dim_term(n, dim, u_max)),
    ]


def _kernel_raw_terms(n: int, delta: float, u_max: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    return [
        ("kernel", 2.0 * u_max / math.sqrt(n)),
        ("sample_n", 2.0 * u_max * _half_root(n, delta, 4.0)),
    ]


def _black_raw_terms(d_size: int | None, delta: float, u_max: float) -> Terms:
    d_size, delta = _check_count("D", d_size), _check_delta(delta)
    return [("sample_D", 2.0 * u_max * _half_root(d_size, delta, 4.0))]


def _map_nd_raw_terms(n: int, d_size: int | None, delta: float) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    d_size = _check_count("D", d_size)
    return [
        ("sample_n", 4.0 * _half_root(n, delta, 8.0)),
        ("sample_D", 4.0 * _half_root(d_size, delta, 8.0)),
    ]


def _map_n_raw_terms(n: int, delta: float, wd_hm: float | None) -> Terms:
    n, delta = _check_count("n", n), _check_delta(delta)
    return [("sample_n", 4.0 * _half_root(n, delta, 8.0)), *_wd_terms(wd_hm)]


# Public formulas -----------------------------------------------------------


def lemma_heart(n: int, dim: int, delta: float) -> float:
    """``3 sqrt(log(1/delta)/n) + (36/n) sqrt(d log d)`` for ``d >= 4``."""
    return _total(_heart_terms(n, dim, delta))


def lemma_heart_smalld(n: int, dim: int, delta: float) -> float:
    """``3 sqrt(log(1/delta)/n) + 72 sqrt(d)/n`` for ``d < 4``."""
    return _total(_heart_smalld_terms(n, dim, delta))


def lemma_kernel(n: int, delta: float) -> float:
    """``3 sqrt(log(1/delta)/n) + 2/sqrt(n)``."""
    return _total(_kernel_terms(n, delta))


def lemma_wd(wd_hm: float) -> float:
    """``2 WD(P_human, P_model)``."""
    return _total(_wd_terms(wd_hm))


def lemma_black(d_size: int, delta: float) -> float:
    """``3 sqrt(log(1/delta)/|D|)``."""
    return _total(_black_terms(d_size, delta))


def theorem_bound3(n: int, dim: int, delta: float, wd_hm: float) -> float:
    """Regret of MC MBR against ``u_h`` with the model fixed: heart term plus ``2 WD``."""
    return _total(_bound3_terms(n, dim, delta, wd_hm))


def theorem_bound(n: int, d_size: int, dim: int, delta: float) -> float:
    """Regret of MC MBR with an empirical model trained on ``|D|`` samples."""
    return _total(_bound_terms(n, d_size, dim, delta))


def expected_regret(bound_value: float, delta: float, worst_case: float = 1.0) -> float:
    """``(1 - delta) R + delta U``: the high-probability bound in expectation."""
    delta = _check_delta(delta)
    if bound_value < 0 or worst_case < 0:
        raise BoundInputError("bound value and worst case must be nonnegative")
    return (1.0 - delta) * bound_value + delta * worst_case


def corollary_mbr(n: int, d_size: int, dim: int, delta: float) -> float:
    """Expected-regret form of :func:`theorem_bound` with ``U = 1``: ``bound + delta``."""
    return _total(_mbr_corollary_terms(n, d_size, dim, delta))


def corollary_utility(n: int, d_size: int, dim: int, delta: float, alpha_err: float) -> float:
    """Proxy-utility regret: the two sample terms plus ``2 d alpha_err``."""
    return _total(_utility_terms(n, d_size, dim, delta, alpha_err))


def corollary_utility_matched(n: int, d_size: int, delta: float, matched_error: float) -> float:
    """Proxy-utility regret with the embedding error measured at the chosen points only."""
    return _total(_utility_matched_terms(n, d_size, delta, matched_error))


def corollary_temperature(n: int, d_size: int, dim: int, delta: float, wd_tt: float) -> float:
    """:func:`theorem_bound` plus ``WD(P_model, P_model^t)``."""
    return _total(_temperature_terms(n, d_size, dim, delta, wd_tt))


def map_bound_n(n: int, delta: float, wd_hm: float) -> float:
    """MAP regret with the model fixed: ``6 sqrt(log(1/delta)/n) + 2 WD``."""
    return _total(_map_n_terms(n, delta, wd_hm))


def map_bound_nd(n: int, d_size: int, delta: float) -> float:
    """MAP regret with an empirical model: ``8 sqrt(log(1/delta)/n) + 8 sqrt(log(1/delta)/|D|)``."""
    return _total(_map_nd_terms(n, d_size, delta))


def lemma_heart_raw(n: int, dim: int, delta: float, u_max: float = 1.0) -> float:
    return _total(_heart_raw_terms(n, dim, delta, u_max))


def equal_distribution_raw(n: int, dim: int, delta: float, u_max: float = 1.0) -> float:
    return _total(_equal_distribution_raw_terms(n, dim, delta, u_max))


def lemma_kernel_raw(n: int, delta: float, u_max: float = 1.0) -> float:
    return _total(_kernel_raw_terms(n, delta, u_max))


def lemma_black_raw(d_size: int, delta: float, u_max: float = 1.0) -> float:
    return _total(_black_raw_terms(d_size, delta, u_max))


def map_bound_nd_raw(n: int, d_size: int, delta: float) -> float:
    return _total(_map_nd_raw_terms(n, d_size, delta))


def map_bound_n_raw(n: int, delta: float, wd_hm: float) -> float:
    return _total(_map_n_raw_terms(n, delta, wd_hm))


# Crossover -----------------------------------------------------------------


def bound_difference(n: int, d_size: int, dim: int, delta: float) -> float:
    """``map_bound_nd - theorem_bound``; nonnegative where MBR has the smaller bound."""
    return map_bound_nd(n, d_size, delta) - theorem_bound(n, d_size, dim, delta)


def crossover_case1(d_size: int, delta: float) -> bool:
    """With finite ``|D|`` and ``n -> inf`` the MBR bound is strictly smaller.

    The limit difference is ``4 sqrt(log(1/delta)/|D|)``.
    """
    d_size, delta = _check_count("D", d_size), _check_delta(delta)
    return 4.0 * _root(d_size, delta) > 0.0


def crossover_case2(n: int, dim: int, delta: float) -> bool:
    """With ``|D| -> inf``: ``(1/9) sqrt(n log(1/delta)) >= sqrt(d log d)``."""
    n, delta, dim = _check_count("n", n), _check_delta(delta), _check_count("dim", dim)
    return math.sqrt(n * math.log(1.0 / delta)) / 9.0 >= math.sqrt(dim * math.log(dim))


def crossover_case2_threshold(dim: int, delta: float) -> int:
    """Smallest ``n`` for which :func:`crossover_case2` holds."""
    delta, dim = _check_delta(delta), _check_count("dim", dim)
    n = max(1, math.ceil(81.0 * dim * math.log(dim) / math.log(1.0 / delta)))
    # Align the analytic value with the predicate under rounding.
    while not crossover_case2(n, dim, delta):
        n += 1
    while n > 1 and crossover_case2(n - 1, dim, delta):
        n -= 1
    return n


def crossover_case3(n: int, d_size: int, dim: int, delta: float) -> bool:
    """``(n/9)(sqrt(log(1/delta)/n) + sqrt(log(1/delta)/|D|)) >= sqrt(d log d)``."""
    n, delta = _check_count("n", n), _check_delta(delta)
    d_size, dim = _check_count("D", d_size), _check_count("dim", dim)
    lhs = n / 9.0 * (_root(n, delta) + _root(d_size, delta))
    return lhs >= math.sqrt(dim * math.log(dim))


def crossover_consistent(n: int, d_size: int, dim: int, delta: float) -> bool:
    """Case 3 agrees with the sign of :func:`bound_difference` (ties within tolerance)."""
    difference = bound_difference(n, d_size, dim, delta)
    if abs(difference) <= CROSSOVER_TOL:
        return True
    return crossover_case3(n, d_size, dim, delta) == (difference >= 0.0)


# Report --------------------------------------------------------------------

def _expected_terms(terms: Terms, delta: float, worst_case: float) -> Terms:
    """Scale ``terms`` by ``1 - delta`` and add the failure-event term ``delta U``."""
    return [(label, (1.0 - delta) * value) for label, value in terms] + [
        ("failure", delta * worst_case)
    ]


_Builder = Callable[[BoundInputs], Terms]

PUBLISHED_BOUNDS: dict[str, tuple[tuple[str, ...], _Builder]] = {
    "lemma_heart": (("dim>=4",), lambda b: _heart_terms(b.n, b.dim, b.delta)),
    "lemma_heart_smalld": (("dim<4",), lambda b: _heart_smalld_terms(b.n, b.dim, b.delta)),
    "lemma_kernel": ((), lambda b: _kernel_terms(b.n, b.delta)),
    "lemma_wd": (("wd_hm",), lambda b: _wd_terms(b.wd_hm)),
    "lemma_black": (("D",), lambda b: _black_terms(b.d_size, b.delta)),
    "theorem_bound3": (("wd_hm",), lambda b: _bound3_terms(b.n, b.dim, b.delta, b.wd_hm)),
    "theorem_bound": (("D",), lambda b: _bound_terms(b.n, b.d_size, b.dim, b.delta)),
    "corollary_mbr": (("D",), lambda b: _mbr_corollary_terms(b.n, b.d_size, b.dim, b.delta)),
    "corollary_utility": (
        ("D", "alpha_err"),
        lambda b: _utility_terms(b.n, b.d_size, b.dim, b.delta, b.alpha_err),
    ),
    "corollary_temperature": (
        ("D", "wd_tt"),
        lambda b: _temperature_terms(b.n, b.d_size, b.dim, b.delta, b.wd_tt),
    ),
    "map_bound_n": (("wd_hm",), lambda b: _map_n_terms(b.n, b.delta, b.wd_hm)),
    "map_bound_nd": (("D",), lambda b: _map_nd_terms(b.n, b.d_size, b.delta)),
    "expected_theorem_bound3": (
        ("wd_hm",),
        lambda b: _expected_terms(
            _bound3_terms(b.n, b.dim, b.delta, b.wd_hm), b.delta, b.u_max
        ),
    ),
    "expected_theorem_bound": (
        ("D",),
        lambda b: _expected_terms(
            _bound_terms(b.n, b.d_size, b.dim, b.delta), b.delta, b.u_max
        ),
    ),
}

RAW_BOUNDS: dict[str, tuple[tuple[str, ...], _Builder]] = {
    "lemma_heart_raw": ((), lambda b: _heart_raw_terms(b.n, b.dim, b.delta, b.u_max)),
    "equal_distribution_raw": (
        (),
        lambda b: _equal_distribution_raw_terms(b.n, b.dim, b.delta, b.u_max),
    ),
    "lemma_kernel_raw": ((), lambda b: _kernel_raw_terms(b.n, b.delta, b.u_max)),
    "lemma_black_raw": (("D",), lambda b: _black_raw_terms(b.d_size, b.delta, b.u_max)),
    "map_bound_nd_raw": (("D",), lambda b: _map_nd_raw_terms(b.n, b.d_size, b.delta)),
    "map_bound_n_raw": (("wd_hm",), lambda b: _map_n_raw_terms(b.n, b.delta, b.wd_hm)),
}

_SYMBOL_FIELDS = {"D": "d_size", "wd_hm": "wd_hm", "wd_tt": "wd_tt", "alpha_err": "alpha_err"}


def _missing(inputs: BoundInputs, requires: tuple[str, ...]) -> list[str]:
    missing = []
    for symbol in requires:
        if symbol == "dim>=4":
            if inputs.dim < 4:
                missing.append(symbol)
        elif symbol == "dim<4":
            if inputs.dim >= 4:
                missing.append(symbol)
        elif getattr(inputs, _SYMBOL_FIELDS[symbol]) is None:
            missing.append(symbol)
    return missing


def evaluate_bounds(inputs: BoundInputs, raw: bool = False) -> BoundReport:
    """Evaluate every bound whose symbols are present in ``inputs``.

    Args:
        inputs: Bound symbols; optional ones may be None.
        raw: Also evaluate the pre-simplification forms.

    Returns:
        Evaluated bounds with their terms, and the omitted bounds with the
        symbols they require.

    Raises:
        BoundInputError: If a present symbol is out of range.
    """
    table = dict(PUBLISHED_BOUNDS)
    if raw:
        table.update(RAW_BOUNDS)

    report = BoundReport(inputs=inputs, raw=raw)
    for name, (requires, builder) in table.items():
        missing = _missing(inputs, requires)
        if missing:
            report.omitted[name] = missing
            continue
        terms = builder(inputs)
        report.bounds[name] = BoundValue(
            name=name,
            value=_total(terms),
            terms=[BoundTerm(label=label, value=value) for label, value in terms],
        )

    logger.debug(
        "bounds_evaluated",
        n=inputs.n,
        d_size=inputs.d_size,
        delta=inputs.delta,
        evaluated=len(report.bounds),
        omitted=len(report.omitted),
    )
    return report
