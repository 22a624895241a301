"""Tests for lab settings and config files."""

import pytest

from mbr_regret.config import LabConfig, config
from mbr_regret.errors import ExperimentConfigError
from mbr_regret.models import CandidateMode, CostMode, FamilyKind
from mbr_regret.tools.config_file import (
    apply_overrides,
    build_decode_config,
    build_experiment_spec,
    load_config_file,
    parse_config_text,
)

SAMPLE_CONFIG = """
# Regret sweep
experiment.space_size = 200
experiment.human_family = dirichlet(0.5)
experiment.n_grid = 50, 100, 200   # trailing comment
experiment.d_grid = [1000, 5000]
experiment.deltas = 0.01, 0.1
experiment.cost_mode = tightened
simulate.seeds = 10
simulate.observation1 = true
simulate.temperatures = none
"""


def test_config_singleton():
    """Test that config is properly initialized."""
    assert config is not None
    assert isinstance(config, LabConfig)


def test_config_defaults():
    """Test default configuration values."""
    fresh = LabConfig(_env_file=None)
    assert fresh.wd_size_limit == 2000
    assert fresh.cost_size_limit == 500
    assert fresh.bruteforce_support_limit == 6
    assert fresh.workers == 1
    assert fresh.default_seeds == 100
    assert fresh.csv_precision == 17


def test_config_from_environment(monkeypatch):
    """Test MBR_REGRET_ environment overrides."""
    monkeypatch.setenv("MBR_REGRET_WORKERS", "4")
    monkeypatch.setenv("MBR_REGRET_WD_SIZE_LIMIT", "50")
    fresh = LabConfig(_env_file=None)
    assert fresh.workers == 4
    assert fresh.wd_size_limit == 50


class TestConfigFile:
    """Tests for section.key = value files."""

    def test_parse(self):
        tree = parse_config_text(SAMPLE_CONFIG)
        assert tree["experiment"]["n_grid"] == "50, 100, 200"
        assert tree["simulate"]["seeds"] == "10"
        assert tree["decode"] == {}

    def test_build_spec(self):
        spec = build_experiment_spec(parse_config_text(SAMPLE_CONFIG))
        assert spec.space_size == 200
        assert spec.human_family.kind == FamilyKind.DIRICHLET
        assert spec.human_family.alpha == 0.5
        assert spec.n_grid == [50, 100, 200]
        assert spec.d_grid == [1000, 5000]
        assert spec.deltas == [0.01, 0.1]
        assert spec.cost_mode == CostMode.TIGHTENED
        assert spec.seeds == 10
        assert spec.observation1 is True
        assert spec.temperatures is None

    def test_overrides_take_precedence(self):
        tree = apply_overrides(parse_config_text(SAMPLE_CONFIG), ["simulate.seeds=3"])
        assert build_experiment_spec(tree).seeds == 3

    def test_unknown_key(self):
        tree = parse_config_text("experiment.spaec_size = 10")
        with pytest.raises(ExperimentConfigError, match="unknown key 'experiment.spaec_size'"):
            build_experiment_spec(tree)

    def test_unknown_section(self):
        with pytest.raises(ExperimentConfigError, match="line 1: unknown section"):
            parse_config_text("plot.width = 3")

    def test_malformed_line(self):
        with pytest.raises(ExperimentConfigError, match="line 2"):
            parse_config_text("experiment.dim = 4\nnot an assignment")

    def test_malformed_override(self):
        with pytest.raises(ExperimentConfigError, match="--set"):
            apply_overrides({}, ["seeds"])

    def test_invalid_value(self):
        tree = parse_config_text("experiment.deltas = 0.5, 1.5")
        with pytest.raises(ExperimentConfigError, match="Invalid experiment configuration"):
            build_experiment_spec(tree)

    def test_decreasing_grid(self):
        tree = parse_config_text("experiment.n_grid = 100, 50")
        with pytest.raises(ExperimentConfigError, match="strictly increasing"):
            build_experiment_spec(tree)

    def test_load_file(self, write_text):
        path = write_text("lab.conf", SAMPLE_CONFIG)
        assert load_config_file(path)["experiment"]["space_size"] == "200"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ExperimentConfigError, match="Cannot read config file"):
            load_config_file(tmp_path / "missing.conf")

    def test_decode_section(self):
        tree = parse_config_text(
            "decode.distribution = p.csv\ndecode.utility = u.csv\n"
            "decode.n = 16\ndecode.candidate_mode = full"
        )
        decode = build_decode_config(tree)
        assert decode.n == 16
        assert decode.human is None
        assert decode.candidate_mode == CandidateMode.FULL

    def test_decode_unknown_key(self):
        tree = parse_config_text("decode.distribution = p.csv\ndecode.temperature = 2")
        with pytest.raises(ExperimentConfigError, match="unknown key 'decode.temperature'"):
            build_decode_config(tree)

    def test_override_outside_command_sections(self):
        with pytest.raises(ExperimentConfigError, match="section 'decode' is not used"):
            apply_overrides({}, ["decode.n=3"], ("experiment", "simulate"))

    def test_override_unknown_key(self):
        with pytest.raises(ExperimentConfigError, match="unknown key 'simulate.sample_count'"):
            apply_overrides({}, ["simulate.sample_count=3"])

    def test_override_decode_key(self):
        tree = apply_overrides({}, ["decode.n=7"], ("decode",))
        assert tree["decode"] == {"n": "7"}
        assert tree["experiment"] == {}
