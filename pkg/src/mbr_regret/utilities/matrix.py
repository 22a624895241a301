"""Matrix-backed utilities: the human-biased construction, symmetrization and PSD repair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import structlog

from mbr_regret.errors import UtilityError
from mbr_regret.space import Categorical, make_rng
from mbr_regret.utilities.base import check_pair

logger = structlog.get_logger(__name__)

RANGE_TOL = 1e-12
PSD_TOL = 1e-9
PSD_MAX_ITER = 1000


@dataclass(frozen=True, eq=False)
class MatrixUtility:
    """Dense utility matrix with entries in ``[0, u_max]``."""

    values: np.ndarray
    u_max: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise UtilityError(f"Utility matrix must be square and nonempty, got {values.shape}")
        if not self.u_max > 0:
            raise UtilityError(f"u_max must be positive, got {self.u_max}")
        if not np.all(np.isfinite(values)):
            raise UtilityError("Utility matrix has non-finite entries")
        if values.min() < -RANGE_TOL or values.max() > self.u_max + RANGE_TOL:
            raise UtilityError(
                f"Utility entries must lie in [0, {self.u_max}], "
                f"got [{values.min():.6g}, {values.max():.6g}]"
            )
        values = np.clip(values, 0.0, self.u_max)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def matrix(self) -> np.ndarray:
        return self.values

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.values, self.values.T))

    def value(self, y: int, y2: int) -> float:
        check_pair(self.size, y, y2)
        return float(self.values[y, y2])

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the symmetric part."""
        return float(np.linalg.eigvalsh((self.values + self.values.T) / 2.0).min())


def build_appendix_matrix(p_human: Categorical, beta: float, seed: int) -> MatrixUtility:
    """Symmetric utility with unit diagonal, boosted toward likely hypotheses.

    ``u(i, j) = base(i, j) + beta * min(P(i), P(j)) / max_k P(k)``, clipped to
    ``[0, 1]``, where ``base`` is symmetric uniform noise.
    """
    if beta < 0:
        raise UtilityError(f"beta must be >= 0, got {beta}")

    size = p_human.space.size
    upper = np.triu(make_rng(seed).random((size, size)), k=1)
    base = upper + upper.T
    probs = p_human.probs
    boost = beta * np.minimum.outer(probs, probs) / probs.max()
    values = np.clip(base + boost, 0.0, 1.0)
    np.fill_diagonal(values, 1.0)
    return MatrixUtility(values, u_max=1.0)


def symmetrize(model: MatrixUtility) -> MatrixUtility:
    """``u'(y, y2) = (u(y, y2) + u(y2, y)) / 2``."""
    return MatrixUtility((model.values + model.values.T) / 2.0, u_max=model.u_max)


def _project_psd(values: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = np.linalg.eigh(values)
    projected = (eigenvectors * np.clip(eigenvalues, 0.0, None)) @ eigenvectors.T
    return (projected + projected.T) / 2.0


def psd_project(model: MatrixUtility) -> MatrixUtility:
    """Nearest symmetric PSD matrix with entries in ``[0, u_max]``.

    Eigenvalue clamping alone can push entries outside the box, and clipping
    them back can reintroduce negative eigenvalues, so the two projections are
    alternated with Dykstra's correction until the box-feasible iterate has
    minimum eigenvalue >= -1e-9.
    """
    if not model.is_symmetric:
        raise UtilityError("Utility matrix is not symmetric: symmetrize first")

    current = model.values.copy()
    psd_correction = np.zeros_like(current)
    box_correction = np.zeros_like(current)
    iterations = 0
    for iterations in range(1, PSD_MAX_ITER + 1):
        psd_point = _project_psd(current + psd_correction)
        psd_correction = current + psd_correction - psd_point
        boxed = np.clip(psd_point + box_correction, 0.0, model.u_max)
        box_correction = psd_point + box_correction - boxed
        current = (boxed + boxed.T) / 2.0
        if np.linalg.eigvalsh(current).min() >= -PSD_TOL:
            break
    else:
        logger.warning("psd_projection_not_converged", iterations=iterations)
        current = _shrink_off_diagonal(current)

    logger.debug("psd_projection_done", size=model.size, iterations=iterations)
    return MatrixUtility(current, u_max=model.u_max)


def _shrink_off_diagonal(values: np.ndarray) -> np.ndarray:
    """Smallest shrink of the off-diagonal part that makes ``values`` PSD.

    The minimum eigenvalue is concave along the segment to the (PSD,
    box-feasible) diagonal, so bisection on the shrink factor is exact.
    """
    diagonal = np.diag(np.diag(values))
    off = values - diagonal
    low, high = 0.0, 1.0
    for _ in range(60):
        mid = (low + high) / 2.0
        if np.linalg.eigvalsh(diagonal + (1.0 - mid) * off).min() >= -PSD_TOL:
            high = mid
        else:
            low = mid
    return diagonal + (1.0 - high) * off
