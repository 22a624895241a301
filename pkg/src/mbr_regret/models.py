"""Pydantic models for decoding results, bound reports and experiment specs."""

import re
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mbr_regret.config import config

REGRET_TOL = 1e-12
BOUND_SUM_TOL = 1e-12


class Objective(str, Enum):
    """Objective maximized by a decoder."""

    U_H = "u_h"
    U_M = "u_m"
    U_HAT_M = "u_hat_m"
    U_HAT_M_T = "u_hat_m_t"
    U_PRIME = "u_prime"
    P_HUMAN = "P_human"
    P_MODEL = "P_model"
    P_HAT = "P_hat"


class FamilyKind(str, Enum):
    """Generator family for the human distribution."""

    ZIPF = "zipf"
    DIRICHLET = "dirichlet"


class UtilityKind(str, Enum):
    """How the pairwise utility of an experiment is built."""

    EMBEDDING = "embedding"
    APPENDIX_I_MATRIX = "appendix_i_matrix"


class CostMode(str, Enum):
    """Lipschitz cost construction."""

    TRIVIAL = "trivial"
    TIGHTENED = "tightened"


class CandidateMode(str, Enum):
    """Candidate set of Monte Carlo MBR decoding."""

    REFS = "refs"
    FULL = "full"


_FAMILY_PATTERN = re.compile(r"^\s*(zipf|dirichlet)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


class HumanFamily(BaseModel):
    """Family and parameter of the generated human distribution."""

    kind: FamilyKind = FamilyKind.ZIPF
    s: float = Field(1.0, description="Zipf exponent")
    alpha: float = Field(1.0, description="Symmetric Dirichlet concentration")

    model_config = ConfigDict(frozen=True)

    @field_validator("s", "alpha")
    def validate_positive(cls, v):
        if not v > 0:
            raise ValueError("family parameter must be positive")
        return v

    @classmethod
    def parse(cls, text: str) -> "HumanFamily":
        """Parse ``zipf(1.0)``, ``dirichlet(0.5)`` or a bare family name."""
        match = _FAMILY_PATTERN.match(text.lower())
        if match is None:
            raise ValueError(f"Unknown distribution family: {text!r}")
        kind, param = match.group(1), match.group(2)
        if not param:
            return cls(kind=FamilyKind(kind))
        value = float(param)
        if kind == FamilyKind.ZIPF.value:
            return cls(kind=FamilyKind.ZIPF, s=value)
        return cls(kind=FamilyKind.DIRICHLET, alpha=value)

    def __str__(self) -> str:
        if self.kind == FamilyKind.ZIPF:
            return f"zipf({self.s:g})"
        return f"dirichlet({self.alpha:g})"


class DecodeResult(BaseModel):
    """Chosen hypothesis and the objective value it attains."""

    chosen: int = Field(..., ge=0)
    score: float
    objective: Objective

    model_config = ConfigDict(frozen=True)


class RegretReport(BaseModel):
    """Measured regrets of one trial."""

    seed: int
    n: int = Field(..., ge=1)
    d_size: int | None = Field(None, ge=1)
    regret_n: float
    regret_map: float
    regret_u: float | None = None
    regret_t: float | None = None
    temperature: float | None = None
    noise_scale: float | None = None

    # Chosen points
    y_star: int
    y_hat: int
    map_star: int
    map_hat: int

    # Observation 1 quantities, both directions
    mbr_vs_map_human: float = Field(..., description="u_h(y*) - u_h(h_MAP)")
    mbr_vs_map_model: float = Field(..., description="u_m(y_hat) - u_m(h_MAP)")
    map_vs_mbr_human: float = Field(..., description="P_human(y*_MAP) - P_human(y_hat)")
    map_vs_mbr_model: float = Field(..., description="P_model(h_MAP) - P_model(y_hat)")

    # Proxy utility diagnostics
    alpha_err: float | None = None
    alpha_err_matched: float | None = None

    @model_validator(mode="after")
    def validate_nonnegative(self):
        for name in ("regret_n", "regret_map", "regret_u", "regret_t"):
            value = getattr(self, name)
            if value is not None and value < -REGRET_TOL:
                raise ValueError(f"{name} must be nonnegative, got {value}")
        return self


class BoundInputs(BaseModel):
    """Every symbol appearing in the implemented bound formulas."""

    n: int = Field(..., ge=1)
    d_size: int | None = Field(None, ge=1)
    dim: int = Field(4, ge=1)
    delta: float
    wd_hm: float | None = Field(None, ge=0.0)
    wd_tt: float | None = Field(None, ge=0.0)
    u_max: float = Field(1.0, gt=0.0)
    alpha_err: float | None = Field(None, ge=0.0)

    @field_validator("delta")
    def validate_delta(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("delta must be in (0,1)")
        return v


class BoundTerm(BaseModel):
    """One additive term of a bound."""

    label: str
    value: float


class BoundValue(BaseModel):
    """A bound value with its additive breakdown."""

    name: str
    value: float = Field(..., ge=0.0)
    terms: list[BoundTerm] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_terms(self):
        if self.terms:
            total = sum(t.value for t in self.terms)
            if abs(total - self.value) > BOUND_SUM_TOL * max(1.0, abs(self.value)):
                raise ValueError(f"{self.name}: terms sum to {total}, value is {self.value}")
        return self


class BoundReport(BaseModel):
    """Evaluated upper bounds for one parameter tuple."""

    inputs: BoundInputs
    raw: bool = False
    bounds: dict[str, BoundValue] = Field(default_factory=dict)
    omitted: dict[str, list[str]] = Field(
        default_factory=dict, description="Bound name -> missing symbols"
    )

    def value(self, name: str) -> float | None:
        """Bound value by name, or None when it was omitted."""
        bound = self.bounds.get(name)
        return bound.value if bound is not None else None

    @property
    def dominant_term_labels(self) -> dict[str, str]:
        """Label of the largest additive term of each bound."""
        return {
            name: max(b.terms, key=lambda t: t.value).label
            for name, b in self.bounds.items()
            if b.terms
        }


class TransportStats(BaseModel):
    """Solver statistics of one transport problem."""

    method: str
    iterations: int = 0
    degenerate_pivots: int = 0
    rows: int = 0
    cols: int = 0


def _check_increasing(name: str, values: list) -> None:
    if not values:
        raise ValueError(f"{name} must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:], strict=False)):
        raise ValueError(f"{name} must be strictly increasing")


class ExperimentSpec(BaseModel):
    """One simulation experiment: a grid over n, |D| and delta, repeated over seeds."""

    space_size: int = Field(default_factory=lambda: config.default_space_size, ge=1)
    dim: int = Field(4, ge=1)
    u_max: float = Field(1.0, gt=0.0, le=1.0)
    human_family: HumanFamily = Field(default_factory=HumanFamily)
    utility_kind: UtilityKind = UtilityKind.EMBEDDING
    beta: float = Field(default_factory=lambda: config.appendix_beta, ge=0.0)
    n_grid: list[int] = Field(default_factory=lambda: [50, 100, 200, 500])
    d_grid: list[int] = Field(default_factory=lambda: [5000])
    deltas: list[float] = Field(default_factory=lambda: [0.01, 0.1])
    temperatures: list[float] | None = None
    noise_scales: list[float] | None = None
    seeds: int = Field(default_factory=lambda: config.default_seeds, ge=1)
    master_seed: int = Field(default_factory=lambda: config.default_master_seed, ge=0)

    cost_mode: CostMode = CostMode.TRIVIAL
    candidate_mode: CandidateMode = CandidateMode.REFS
    fixed_human: bool = Field(False, description="Draw P_human once for all seeds")
    human_as_model: bool = Field(False, description="P_model = P_human; d_grid unused")
    compute_wd: bool = True
    observation1: bool = False
    workers: int = Field(default_factory=lambda: config.workers, ge=1)

    model_config = ConfigDict(extra="forbid")

    @field_validator("human_family", mode="before")
    def parse_family(cls, v):
        if isinstance(v, str):
            return HumanFamily.parse(v)
        return v

    @field_validator("n_grid", "d_grid")
    def validate_count_grid(cls, v, info):
        _check_increasing(info.field_name, v)
        if any(x < 1 for x in v):
            raise ValueError(f"{info.field_name} entries must be >= 1")
        return v

    @field_validator("deltas")
    def validate_deltas(cls, v):
        _check_increasing("deltas", v)
        if any(not 0.0 < d < 1.0 for d in v):
            raise ValueError("delta must be in (0,1)")
        return v

    @field_validator("temperatures", "noise_scales")
    def validate_variant_grid(cls, v, info):
        if v is None:
            return v
        _check_increasing(info.field_name, v)
        if info.field_name == "temperatures" and any(t <= 0 for t in v):
            raise ValueError("invalid temperature")
        if info.field_name == "noise_scales" and any(s < 0 for s in v):
            raise ValueError("noise scale must be nonnegative")
        return v

    @model_validator(mode="after")
    def validate_variants(self):
        if self.noise_scales and self.utility_kind != UtilityKind.EMBEDDING:
            raise ValueError("noise_scales require utility_kind = embedding")
        return self


class SweepRow(BaseModel):
    """One (n, |D|, delta, seed, variant) measurement with its bounds."""

    seed: int
    n: int
    D: int | None = None
    delta_config: float
    regret_n: float
    regret_map: float
    regret_u: float | None = None
    regret_t: float | None = None
    temperature: float | None = None
    noise_scale: float | None = None
    wd_hm: float | None = None
    wd_skipped: bool = False
    wd_tt: float | None = None
    alpha_err: float | None = None
    bound_mbr: float | None = None
    bound3: float | None = None
    bound_kernel: float | None = None
    bound_map: float | None = None
    bound_map_n: float | None = None
    bound_utility: float | None = None
    bound_utility_matched: float | None = None
    bound_temperature: float | None = None
    violation_mbr: bool | None = None
    violation_bound3: bool | None = None
    violation_map: bool | None = None
    violation_utility: bool | None = None
    violation_temperature: bool | None = None
    mbr_vs_map_human: float
    mbr_vs_map_model: float
    map_vs_mbr_human: float
    map_vs_mbr_model: float


class PointSummary(BaseModel):
    """Aggregate over seeds at one grid point."""

    n: int
    D: int | None = None
    delta_config: float
    temperature: float | None = None
    noise_scale: float | None = None
    seeds: int
    regret_n_mean: float
    regret_n_median: float
    regret_map_mean: float
    regret_map_median: float
    bound_mbr: float | None = None
    bound3_mean: float | None = None
    bound_map: float | None = None
    gap_median: float | None = None
    violation_rate_mbr: float | None = None
    violation_rate_bound3: float | None = None
    violation_rate_map: float | None = None
    regret_u_median: float | None = None
    bound_utility_mean: float | None = None
    violation_rate_utility: float | None = None
    regret_t_median: float | None = None
    bound_temperature_mean: float | None = None
    violation_rate_temperature: float | None = None


class SweepResult(BaseModel):
    """Rows and per-point summary of one sweep."""

    spec: ExperimentSpec
    rows: list[SweepRow]
    summary: list[PointSummary]


class CrossoverRow(BaseModel):
    """MBR vs MAP bound comparison at one (n, |D|)."""

    n: int
    D: int
    dim: int
    delta: float
    mbr_bound: float
    map_bound: float
    difference: float
    case2: bool
    case3: bool
    consistent: bool


class Observation1Row(BaseModel):
    """Observation 1 quantities of one seed."""

    seed: int
    n: int
    D: int | None = None
    mbr_vs_map_human: float
    mbr_vs_map_model: float
    gap: float
    map_vs_mbr_human: float
    map_vs_mbr_model: float
    map_gap: float


class DecodeConfig(BaseModel):
    """Inputs of the ``decode`` command."""

    distribution: str = Field(..., description="Model distribution file (index,probability)")
    utility: str = Field(..., description="Utility matrix file")
    human: str | None = Field(None, description="Optional human distribution file")
    n: int = Field(..., ge=1)
    seed: int = Field(0, ge=0)
    candidate_mode: CandidateMode = CandidateMode.REFS
    u_max: float = Field(1.0, gt=0.0)

    model_config = ConfigDict(extra="forbid")
