"""Inner-product utilities over nonnegative embeddings, and proxy perturbations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import structlog
from scipy.spatial.distance import cdist

from mbr_regret.errors import UtilityError
from mbr_regret.space import make_rng
from mbr_regret.utilities.base import check_pair

logger = structlog.get_logger(__name__)

NORM_TOL = 1e-9


def _gram(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    matrix = left @ right.T
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class EmbeddingUtility:
    """``u(y, y2) = alpha(y) . alpha(y2)`` with nonnegative embeddings."""

    embeddings: np.ndarray
    u_max: float
    _matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        embeddings = np.array(self.embeddings, dtype=np.float64, copy=True)
        if embeddings.ndim != 2 or embeddings.shape[0] < 1 or embeddings.shape[1] < 1:
            raise UtilityError("Embeddings must be a nonempty size x dim matrix")
        if np.any(embeddings < 0):
            raise UtilityError("Embeddings must have nonnegative coordinates")
        max_norm = float(np.linalg.norm(embeddings, axis=1).max())
        if abs(max_norm - self.u_max) > NORM_TOL:
            raise UtilityError(f"Maximum embedding norm {max_norm} differs from u_max {self.u_max}")
        embeddings.setflags(write=False)
        object.__setattr__(self, "embeddings", embeddings)

        gram = embeddings @ embeddings.T
        # Averaging with the transpose makes u(a, b) == u(b, a) bit for bit.
        gram = (gram + gram.T) / 2.0
        gram.setflags(write=False)
        object.__setattr__(self, "_matrix", gram)

    @property
    def size(self) -> int:
        return int(self.embeddings.shape[0])

    @property
    def dim(self) -> int:
        return int(self.embeddings.shape[1])

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def value(self, y: int, y2: int) -> float:
        check_pair(self.size, y, y2)
        return float(self._matrix[y, y2])


@dataclass(frozen=True, eq=False)
class PerturbedUtility:
    """Proxy utility ``u'(y, y2) = alpha'(y) . alpha(y2)``.

    Only the candidate-side embedding is perturbed; references keep the true
    embedding. ``alpha_err`` maximizes ``||alpha(y) - alpha'(y2)||`` over all
    cross pairs, ``matched_error(y)`` is the same-index distance.
    """

    base: EmbeddingUtility
    perturbed_embeddings: np.ndarray
    noise_scale: float = 0.0
    alpha_err: float = field(init=False)
    _matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        perturbed = np.array(self.perturbed_embeddings, dtype=np.float64, copy=True)
        if perturbed.shape != self.base.embeddings.shape:
            raise UtilityError("Perturbed embeddings must match the base shape")
        perturbed.setflags(write=False)
        object.__setattr__(self, "perturbed_embeddings", perturbed)
        object.__setattr__(
            self, "alpha_err", float(cdist(self.base.embeddings, perturbed).max())
        )
        object.__setattr__(self, "_matrix", _gram(perturbed, self.base.embeddings))

    @property
    def size(self) -> int:
        return self.base.size

    @property
    def u_max(self) -> float:
        return self.base.u_max

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def value(self, y: int, y2: int) -> float:
        check_pair(self.size, y, y2)
        return float(self._matrix[y, y2])

    def matched_error(self, y: int) -> float:
        """``||alpha(y) - alpha'(y)||``."""
        check_pair(self.size, y, y)
        return float(np.linalg.norm(self.base.embeddings[y] - self.perturbed_embeddings[y]))

    @property
    def alpha_err_matched(self) -> float:
        """Largest same-index embedding error."""
        diffs = self.base.embeddings - self.perturbed_embeddings
        return float(np.linalg.norm(diffs, axis=1).max())


def build_embedding_utility(size: int, dim: int, u_max: float, seed: int) -> EmbeddingUtility:
    """Uniform ``[0, 1]^dim`` embeddings rescaled so the largest norm is ``u_max``."""
    if size < 1:
        raise UtilityError(f"Utility size must be >= 1, got {size}")
    if dim < 1:
        raise UtilityError(f"Embedding dimension must be >= 1, got {dim}")
    if not 0.0 < u_max <= 1.0:
        raise UtilityError(f"u_max must be in (0, 1], got {u_max}")

    embeddings = make_rng(seed).random((size, dim))
    norms = np.linalg.norm(embeddings, axis=1)
    if norms.max() == 0.0:  # pragma: no cover
        embeddings[:, 0] = 1.0
        norms = np.linalg.norm(embeddings, axis=1)
    embeddings *= u_max / norms.max()
    return EmbeddingUtility(embeddings, u_max)


def perturb_embeddings(base: EmbeddingUtility, noise_scale: float, seed: int) -> PerturbedUtility:
    """Gaussian-perturbed proxy embeddings, clipped to the orthant and the ``u_max`` ball.

    Clipping then rescaling is the Euclidean projection onto the orthant
    intersected with the ball. For a fixed seed the same-index error
    ``alpha_err_matched`` is therefore nondecreasing in ``noise_scale``; the
    cross-pair ``alpha_err`` is not, and stays below ``sqrt(2) u_max``.
    """
    if noise_scale < 0:
        raise UtilityError(f"noise_scale must be >= 0, got {noise_scale}")

    noise = make_rng(seed).standard_normal(base.embeddings.shape) * noise_scale
    perturbed = np.clip(base.embeddings + noise, 0.0, None)
    norms = np.linalg.norm(perturbed, axis=1)
    scale = np.where(norms > base.u_max, base.u_max / np.maximum(norms, 1e-300), 1.0)
    perturbed *= scale[:, None]

    proxy = PerturbedUtility(base, perturbed, noise_scale=noise_scale)
    logger.debug("embeddings_perturbed", noise_scale=noise_scale, alpha_err=proxy.alpha_err)
    return proxy
