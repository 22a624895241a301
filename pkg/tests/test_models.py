"""Tests for pydantic models."""

import pytest
from pydantic import ValidationError

from mbr_regret.models import (
    BoundTerm,
    BoundValue,
    DecodeConfig,
    ExperimentSpec,
    FamilyKind,
    HumanFamily,
)


class TestHumanFamily:
    """Tests for HumanFamily parsing."""

    @pytest.mark.parametrize(
        "text, kind, s, alpha",
        [
            ("zipf(1.5)", FamilyKind.ZIPF, 1.5, 1.0),
            ("Dirichlet( 0.3 )", FamilyKind.DIRICHLET, 1.0, 0.3),
            ("zipf", FamilyKind.ZIPF, 1.0, 1.0),
        ],
    )
    def test_parse(self, text, kind, s, alpha):
        family = HumanFamily.parse(text)
        assert (family.kind, family.s, family.alpha) == (kind, s, alpha)

    def test_str(self):
        assert str(HumanFamily.parse("dirichlet(0.5)")) == "dirichlet(0.5)"

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            HumanFamily.parse("poisson(2)")

    def test_nonpositive_parameter(self):
        with pytest.raises(ValidationError):
            HumanFamily.parse("zipf(0)")


class TestExperimentSpec:
    """Tests for ExperimentSpec validation."""

    def test_defaults(self):
        spec = ExperimentSpec()
        assert spec.n_grid == [50, 100, 200, 500]
        assert spec.d_grid == [5000]
        assert spec.deltas == [0.01, 0.1]
        assert spec.space_size == 1000

    def test_family_from_string(self):
        assert ExperimentSpec(human_family="dirichlet(2)").human_family.alpha == 2.0

    @pytest.mark.parametrize(
        "field, value",
        [
            ("n_grid", [100, 50]),
            ("n_grid", []),
            ("d_grid", [0, 10]),
            ("deltas", [0.1, 1.0]),
            ("temperatures", [0.0, 1.0]),
            ("noise_scales", [-0.1]),
            ("seeds", 0),
        ],
    )
    def test_invalid(self, field, value):
        with pytest.raises(ValidationError):
            ExperimentSpec(**{field: value})

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            ExperimentSpec(sample_sizes=[1, 2])


class TestBoundValue:
    """Tests for additive bound breakdowns."""

    def test_terms_must_sum(self):
        with pytest.raises(ValidationError):
            BoundValue(
                name="b",
                value=1.0,
                terms=[BoundTerm(label="a", value=0.4), BoundTerm(label="b", value=0.4)],
            )

    def test_negative_value(self):
        with pytest.raises(ValidationError):
            BoundValue(name="b", value=-0.1)


class TestDecodeConfig:
    """Tests for decode inputs."""

    def test_requires_positive_n(self):
        with pytest.raises(ValidationError):
            DecodeConfig(distribution="p.csv", utility="u.csv", n=0)

    def test_extra_forbidden(self):
        with pytest.raises(ValidationError):
            DecodeConfig(distribution="p.csv", utility="u.csv", n=1, temperature=2.0)
