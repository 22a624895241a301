"""Pairwise utility models."""

from mbr_regret.utilities.base import UtilityModel, utility
from mbr_regret.utilities.cost import LipschitzCost, default_cost
from mbr_regret.utilities.embedding import (
    EmbeddingUtility,
    PerturbedUtility,
    build_embedding_utility,
    perturb_embeddings,
)
from mbr_regret.utilities.matrix import (
    MatrixUtility,
    build_appendix_matrix,
    psd_project,
    symmetrize,
)
from mbr_regret.utilities.registry import build_utility, list_utilities, register_utility

__all__ = [
    "UtilityModel",
    "utility",
    "EmbeddingUtility",
    "PerturbedUtility",
    "MatrixUtility",
    "LipschitzCost",
    "build_embedding_utility",
    "perturb_embeddings",
    "build_appendix_matrix",
    "symmetrize",
    "psd_project",
    "default_cost",
    "build_utility",
    "list_utilities",
    "register_utility",
]
