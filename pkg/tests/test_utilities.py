"""Tests for utility models and Lipschitz costs."""

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from mbr_regret.config import config
from mbr_regret.errors import UtilityError
from mbr_regret.models import CostMode, HumanFamily, UtilityKind
from mbr_regret.space import Categorical, make_human_distribution
from mbr_regret.utilities import (
    EmbeddingUtility,
    LipschitzCost,
    MatrixUtility,
    build_appendix_matrix,
    build_embedding_utility,
    build_utility,
    default_cost,
    list_utilities,
    perturb_embeddings,
    psd_project,
    symmetrize,
    utility,
)


class TestEmbeddingUtility:
    """Tests for inner-product utilities."""

    def test_exactly_symmetric(self):
        model = build_embedding_utility(40, 4, 1.0, seed=1)
        assert np.array_equal(model.matrix, model.matrix.T)

    def test_max_norm_matches_u_max(self):
        model = build_embedding_utility(40, 4, 0.8, seed=2)
        norms = np.linalg.norm(model.embeddings, axis=1)
        assert norms.max() == pytest.approx(0.8, abs=1e-9)
        assert model.matrix.min() >= 0.0
        assert model.matrix.max() <= 0.8**2 + 1e-12

    def test_value_accessor(self):
        model = build_embedding_utility(5, 3, 1.0, seed=3)
        assert utility(model, 1, 4) == pytest.approx(float(model.embeddings[1] @ model.embeddings[4]))
        with pytest.raises(UtilityError):
            utility(model, 0, 5)

    def test_negative_embeddings_rejected(self):
        with pytest.raises(UtilityError):
            EmbeddingUtility(np.array([[1.0, 0.0], [-0.1, 0.5]]), 1.0)

    def test_norm_mismatch_rejected(self):
        with pytest.raises(UtilityError):
            EmbeddingUtility(np.array([[0.5, 0.0], [0.1, 0.5]]), 1.0)


class TestPerturbedUtility:
    """Tests for proxy utilities with embedding noise."""

    def test_zero_noise(self):
        base = build_embedding_utility(20, 4, 1.0, seed=4)
        proxy = perturb_embeddings(base, 0.0, seed=5)
        assert np.allclose(proxy.perturbed_embeddings, base.embeddings, rtol=0.0, atol=1e-12)
        assert proxy.alpha_err_matched <= 1e-12
        # Cross pairs make alpha_err the embedding diameter even without noise.
        assert proxy.alpha_err == pytest.approx(cdist(base.embeddings, base.embeddings).max())

    def test_proxy_matrix(self):
        base = build_embedding_utility(15, 4, 1.0, seed=6)
        proxy = perturb_embeddings(base, 0.1, seed=7)
        assert np.allclose(proxy.matrix, proxy.perturbed_embeddings @ base.embeddings.T)
        assert proxy.alpha_err >= proxy.alpha_err_matched
        assert proxy.matched_error(3) <= proxy.alpha_err_matched + 1e-12

    def test_perturbed_embeddings_stay_feasible(self):
        base = build_embedding_utility(30, 4, 1.0, seed=8)
        proxy = perturb_embeddings(base, 0.5, seed=9)
        assert proxy.perturbed_embeddings.min() >= 0.0
        assert np.linalg.norm(proxy.perturbed_embeddings, axis=1).max() <= 1.0 + 1e-12

    def test_negative_noise_rejected(self):
        base = build_embedding_utility(3, 2, 1.0, seed=0)
        with pytest.raises(UtilityError):
            perturb_embeddings(base, -0.1, seed=0)

    def test_matched_error_grows_with_noise(self):
        scales = [k / 10 for k in range(31)]
        for seed in range(30):
            base = build_embedding_utility(20, 4, 1.0, seed=seed)
            proxies = [perturb_embeddings(base, s, seed=100 + seed) for s in scales]
            errors = [proxy.alpha_err_matched for proxy in proxies]
            assert all(b >= a - 1e-12 for a, b in zip(errors, errors[1:]))
            for y in (0, 7, 19):
                per_point = [proxy.matched_error(y) for proxy in proxies]
                assert all(b >= a - 1e-12 for a, b in zip(per_point, per_point[1:]))

    def test_cross_pair_error_is_bounded(self):
        for seed in range(10):
            base = build_embedding_utility(20, 4, 0.7, seed=seed)
            for s in (0.0, 0.1, 1.0, 3.0):
                proxy = perturb_embeddings(base, s, seed=seed)
                assert proxy.alpha_err <= np.sqrt(2) * 0.7 + 1e-12
                assert proxy.alpha_err >= proxy.alpha_err_matched - 1e-12


class TestMatrixUtility:
    """Tests for matrix utilities, symmetrization and PSD repair."""

    def test_out_of_range(self):
        with pytest.raises(UtilityError):
            MatrixUtility(np.array([[1.0, 1.5], [0.2, 1.0]]))

    def test_not_square(self):
        with pytest.raises(UtilityError):
            MatrixUtility(np.ones((2, 3)))

    def test_symmetrize(self):
        model = MatrixUtility(np.array([[1.0, 0.2], [0.6, 1.0]]))
        assert not model.is_symmetric
        sym = symmetrize(model)
        assert sym.is_symmetric
        assert sym.value(0, 1) == pytest.approx(0.4)

    def test_psd_requires_symmetry(self):
        model = MatrixUtility(np.array([[1.0, 0.2], [0.6, 1.0]]))
        with pytest.raises(UtilityError, match="symmetrize first"):
            psd_project(model)

    def test_psd_projection_of_indefinite_matrix(self):
        model = MatrixUtility(np.array([[1.0, 0.9], [0.9, 0.1]]))
        assert model.min_eigenvalue() < 0
        projected = psd_project(model)
        assert projected.is_symmetric
        assert projected.min_eigenvalue() >= -1e-9
        assert projected.matrix.min() >= 0.0
        assert projected.matrix.max() <= 1.0

    def test_psd_projection_keeps_psd_input(self):
        values = np.array([[1.0, 0.5], [0.5, 1.0]])
        projected = psd_project(MatrixUtility(values))
        assert np.allclose(projected.matrix, values, atol=1e-9)

    def test_appendix_matrix(self):
        p_human = make_human_distribution(25, HumanFamily.parse("zipf(1.0)"), seed=0)
        model = build_appendix_matrix(p_human, beta=0.2, seed=1)
        assert model.is_symmetric
        assert np.all(np.diag(model.matrix) == 1.0)
        assert model.matrix.min() >= 0.0 and model.matrix.max() <= 1.0

    def test_appendix_boost_favours_likely_pairs(self):
        p_human = Categorical.from_probs([0.9, 0.05, 0.05])
        plain = build_appendix_matrix(p_human, beta=0.0, seed=3)
        boosted = build_appendix_matrix(p_human, beta=0.2, seed=3)
        assert np.all(boosted.matrix >= plain.matrix)


class TestLipschitzCost:
    """Tests for cost construction."""

    def test_trivial_cost(self, three_point_utility):
        cost = default_cost(three_point_utility, CostMode.TRIVIAL)
        assert cost.uniform_off_diagonal == 1.0
        assert cost.satisfies(three_point_utility)

    def test_tightened_cost_is_valid_and_tighter(self, three_point_utility):
        tight = default_cost(three_point_utility, CostMode.TIGHTENED)
        trivial = default_cost(three_point_utility, CostMode.TRIVIAL)
        assert tight.satisfies(three_point_utility)
        assert np.all(tight.values <= trivial.values)
        # max_y |u(y,0) - u(y,1)| = max(0.2, 0.2, 0.1)
        assert tight.values[0, 1] == pytest.approx(0.2)

    def test_too_small_cost_fails_check(self, three_point_utility):
        tight = default_cost(three_point_utility, CostMode.TIGHTENED)
        assert not tight.scaled(0.5).satisfies(three_point_utility)

    def test_cost_size_limit(self, monkeypatch):
        monkeypatch.setattr(config, "cost_size_limit", 3)
        model = build_embedding_utility(4, 2, 1.0, seed=0)
        with pytest.raises(UtilityError, match="cost matrix too large"):
            default_cost(model, CostMode.TIGHTENED)

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(UtilityError):
            LipschitzCost(np.ones((2, 2)))


class TestRegistry:
    """Tests for the utility registry."""

    def test_registered_kinds(self):
        assert set(list_utilities()) == {kind.value for kind in UtilityKind}

    def test_build_by_name(self):
        p_human = make_human_distribution(10, HumanFamily(), seed=0)
        model = build_utility("embedding", p_human=p_human, dim=3, u_max=1.0, beta=0.2, seed=1)
        assert isinstance(model, EmbeddingUtility)
        assert model.size == 10
