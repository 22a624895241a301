"""Finite hypothesis spaces, categorical distributions and sampling.

All numerical containers are immutable: arrays are copied on construction
and flagged read-only, so instances can be shared across trial workers.
Sampling never touches a global RNG; every draw is derived from an explicit
integer seed through numpy's ``SeedSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import structlog

from mbr_regret.config import config
from mbr_regret.errors import DistributionError, SamplingError
from mbr_regret.models import FamilyKind, HumanFamily

logger = structlog.get_logger(__name__)

_UINT64_MASK = (1 << 64) - 1


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class HypothesisSpace:
    """Indexed finite set of hypotheses."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise DistributionError(f"Hypothesis space size must be >= 1, got {self.size}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.size:
                raise DistributionError(
                    f"Expected {self.size} labels, got {len(labels)}"
                )
            if len(set(labels)) != len(labels):
                raise DistributionError("Hypothesis labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def check_index(self, index: int) -> int:
        """Return ``index`` as int, raising if it is outside the space."""
        if not 0 <= int(index) < self.size:
            raise DistributionError(f"index {index} out of range for space of size {self.size}")
        return int(index)

    def label(self, index: int) -> str:
        """Display label of a hypothesis."""
        index = self.check_index(index)
        return self.labels[index] if self.labels is not None else str(index)


@dataclass(frozen=True, eq=False)
class Categorical:
    """Probability distribution over a hypothesis space."""

    space: HypothesisSpace
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if probs.shape[0] != self.space.size:
            raise DistributionError(
                f"Expected {self.space.size} probabilities, got {probs.shape[0]}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise DistributionError("Probabilities must be finite and nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > config.distribution_tol:
            raise DistributionError(
                f"Probabilities sum to {total:.15g}, not 1 (normalization violated)"
            )
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def from_probs(cls, probs, labels: list[str] | None = None) -> Categorical:
        """Build a distribution together with its space."""
        probs = np.asarray(probs, dtype=np.float64)
        space = HypothesisSpace(probs.shape[0], tuple(labels) if labels else None)
        return cls(space, probs)

    @classmethod
    def uniform(cls, space: HypothesisSpace) -> Categorical:
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def point_mass(cls, space: HypothesisSpace, index: int) -> Categorical:
        probs = np.zeros(space.size)
        probs[space.check_index(index)] = 1.0
        return cls(space, probs)

    @property
    def support(self) -> np.ndarray:
        """Indices with positive probability."""
        return np.flatnonzero(self.probs > 0)

    def total_variation(self, other: Categorical) -> float:
        if other.space.size != self.space.size:
            raise DistributionError("Distributions live on different spaces")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def allclose(self, other: Categorical, atol: float = 1e-12) -> bool:
        return other.space.size == self.space.size and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Multiset of hypothesis indices drawn with a known seed."""

    space: HypothesisSpace
    indices: np.ndarray
    origin_seed: int = 0
    counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if indices.size and (indices.min() < 0 or indices.max() >= self.space.size):
            raise SamplingError("Sample index out of range for the hypothesis space")
        object.__setattr__(self, "indices", _frozen(indices))
        object.__setattr__(
            self, "counts", _frozen(np.bincount(indices, minlength=self.space.size))
        )

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.space == other.space
            and self.origin_seed == other.origin_seed
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def distinct(self) -> np.ndarray:
        """Distinct hypotheses present, ascending."""
        return np.flatnonzero(self.counts)


def derive_seed(master_seed: int, index: int) -> int:
    """Deterministic 64-bit seed for ``(master_seed, index)``."""
    sequence = np.random.SeedSequence([master_seed & _UINT64_MASK, index & _UINT64_MASK])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a seed."""
    return np.random.Generator(np.random.PCG64(seed & _UINT64_MASK))


def sample(dist: Categorical, count: int, seed: int) -> SampleSet:
    """Draw ``count`` i.i.d. hypotheses by inverse-CDF lookup.

    Args:
        dist: Distribution to sample from.
        count: Number of draws.
        seed: Seed of the PCG64 stream.

    Returns:
        The drawn indices, tagged with ``seed``.

    Raises:
        SamplingError: If ``count`` is less than 1.
    """
    if count < 1:
        raise SamplingError("empty sample request")

    cdf = np.cumsum(dist.probs)
    # The last positive entry maps to exactly 1.0, so zero-mass tails are never drawn.
    cdf /= cdf[-1]
    uniforms = make_rng(seed).random(count)
    indices = np.searchsorted(cdf, uniforms, side="right")
    return SampleSet(dist.space, indices, origin_seed=seed)


def empirical_distribution(samples: SampleSet) -> Categorical:
    """Frequency distribution of a sample."""
    if len(samples) == 0:
        raise SamplingError("empty sample request")
    return Categorical(samples.space, samples.counts / len(samples))


def temperature_transform(dist: Categorical, t: float) -> Categorical:
    """Renormalized ``exp(P(y) / t)``.

    The transform exponentiates probabilities, not logits, so ``t = 1`` is not
    the identity.
    """
    if not (t > 0 and np.isfinite(t)):
        raise DistributionError("invalid temperature")

    # Shifted values are <= 0, so a tiny t can only drive weights to exp(-inf) = 0.
    with np.errstate(over="ignore"):
        weights = np.exp((dist.probs - dist.probs.max()) / t)
    return Categorical(dist.space, weights / weights.sum())


def make_human_distribution(size: int, family: HumanFamily, seed: int) -> Categorical:
    """Non-uniform human distribution from a Zipf or Dirichlet family."""
    space = HypothesisSpace(size)
    if size == 1:
        return Categorical(space, np.ones(1))

    if family.kind == FamilyKind.ZIPF:
        weights = np.arange(1, size + 1, dtype=np.float64) ** (-family.s)
    elif family.kind == FamilyKind.DIRICHLET:
        weights = make_rng(seed).dirichlet(np.full(size, family.alpha))
    else:  # pragma: no cover
        raise DistributionError(f"Unknown family: {family.kind}")

    probs = weights / weights.sum()
    logger.debug("human_distribution_built", size=size, family=str(family), seed=seed)
    return Categorical(space, probs)
