"""Protocol for pairwise utility models."""

from typing import Protocol

import numpy as np

from mbr_regret.errors import UtilityError


class UtilityModel(Protocol):
    """Pairwise utility ``u: Y x Y -> [0, u_max]`` over an indexed space.

    ``matrix[y, y2]`` is the utility of candidate ``y`` against reference ``y2``.
    """

    size: int
    u_max: float

    @property
    def matrix(self) -> np.ndarray:
        """Dense read-only ``size x size`` utility matrix."""
        ...

    def value(self, y: int, y2: int) -> float:
        """Utility of candidate ``y`` against reference ``y2``."""
        ...


def check_pair(size: int, y: int, y2: int) -> None:
    """Raise if either index lies outside ``[0, size)``."""
    for index in (y, y2):
        if not 0 <= int(index) < size:
            raise UtilityError(f"index {index} out of range for utility of size {size}")


def utility(model: UtilityModel, y: int, y2: int) -> float:
    """Evaluate any utility model at a pair of hypotheses."""
    return model.value(y, y2)
