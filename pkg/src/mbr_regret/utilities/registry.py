"""Registry of utility builders keyed by experiment utility kind."""

from collections.abc import Callable

import structlog

from mbr_regret.errors import UtilityError
from mbr_regret.models import UtilityKind
from mbr_regret.space import Categorical
from mbr_regret.utilities.base import UtilityModel
from mbr_regret.utilities.embedding import build_embedding_utility
from mbr_regret.utilities.matrix import build_appendix_matrix

logger = structlog.get_logger(__name__)

UtilityBuilder = Callable[..., UtilityModel]

# Builder registry
_builders: dict[UtilityKind, UtilityBuilder] = {}


def register_utility(kind: UtilityKind, builder: UtilityBuilder) -> None:
    """Register a builder for a utility kind."""
    _builders[kind] = builder
    logger.debug("utility_builder_registered", kind=kind.value)


def list_utilities() -> list[str]:
    """Names of all registered utility kinds."""
    return [kind.value for kind in _builders]


def build_utility(
    kind: UtilityKind | str,
    *,
    p_human: Categorical,
    dim: int,
    u_max: float,
    beta: float,
    seed: int,
) -> UtilityModel:
    """Build the utility of an experiment trial."""
    kind = UtilityKind(kind)
    if kind not in _builders:
        raise UtilityError(f"Utility kind '{kind.value}' not found. Available: {list_utilities()}")
    return _builders[kind](p_human=p_human, dim=dim, u_max=u_max, beta=beta, seed=seed)


def _embedding_builder(*, p_human: Categorical, dim: int, u_max: float, beta: float, seed: int):
    return build_embedding_utility(p_human.space.size, dim, u_max, seed)


def _appendix_builder(*, p_human: Categorical, dim: int, u_max: float, beta: float, seed: int):
    return build_appendix_matrix(p_human, beta, seed)


register_utility(UtilityKind.EMBEDDING, _embedding_builder)
register_utility(UtilityKind.APPENDIX_I_MATRIX, _appendix_builder)
