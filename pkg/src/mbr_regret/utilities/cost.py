"""Lipschitz cost matrices for the Wasserstein term."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import structlog

from mbr_regret.config import config
from mbr_regret.errors import UtilityError
from mbr_regret.models import CostMode
from mbr_regret.utilities.base import UtilityModel

logger = structlog.get_logger(__name__)

LIPSCHITZ_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LipschitzCost:
    """Nonnegative cost with zero diagonal bounding utility differences."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise UtilityError(f"Cost matrix must be square and nonempty, got {values.shape}")
        if not np.all(np.isfinite(values)) or values.min() < 0:
            raise UtilityError("Cost entries must be finite and nonnegative")
        if np.any(np.diag(values) != 0):
            raise UtilityError("Cost matrix must have a zero diagonal")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def uniform_off_diagonal(self) -> float | None:
        """The common off-diagonal value if the cost is constant off the diagonal."""
        if self.size == 1:
            return 0.0
        off = self.values[~np.eye(self.size, dtype=bool)]
        return float(off[0]) if np.all(off == off[0]) else None

    def scaled(self, factor: float) -> LipschitzCost:
        if factor <= 0:
            raise UtilityError(f"Scale factor must be positive, got {factor}")
        return LipschitzCost(self.values * factor)

    def satisfies(self, model: UtilityModel) -> bool:
        """Exhaustive check of ``|u(y, a) - u(y, b)| <= C(a, b)`` for all ``y, a, b``."""
        return bool(np.all(_tightened_values(model.matrix) <= self.values + LIPSCHITZ_TOL))


def _tightened_values(U: np.ndarray) -> np.ndarray:
    size = U.shape[0]
    values = np.empty((size, size))
    for j in range(size):
        values[j] = np.abs(U - U[:, [j]]).max(axis=0)
    np.fill_diagonal(values, 0.0)
    return values


def default_cost(model: UtilityModel, mode: CostMode | str = CostMode.TRIVIAL) -> LipschitzCost:
    """Trivial cost ``u_max`` off the diagonal, or the tightest valid cost."""
    mode = CostMode(mode)
    if mode == CostMode.TRIVIAL:
        values = np.full((model.size, model.size), float(model.u_max))
        np.fill_diagonal(values, 0.0)
        return LipschitzCost(values)

    if model.size > config.cost_size_limit:
        raise UtilityError(
            f"cost matrix too large: {model.size} > cost_size_limit={config.cost_size_limit}"
        )
    cost = LipschitzCost(_tightened_values(model.matrix))
    logger.debug("tightened_cost_built", size=model.size, max_cost=float(cost.values.max()))
    return cost
