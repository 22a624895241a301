"""Pytest configuration and fixtures."""

import numpy as np
import pytest
import structlog

from mbr_regret.models import ExperimentSpec
from mbr_regret.space import Categorical
from mbr_regret.utilities import MatrixUtility

THREE_POINT_UTILITY = [[1.0, 0.8, 0.2], [0.8, 1.0, 0.3], [0.2, 0.3, 1.0]]
THREE_POINT_PROBS = [0.5, 0.3, 0.2]


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo logging configured by CLI runs; it binds the captured stderr."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def three_point_utility():
    """Symmetric 3x3 utility of the worked example."""
    return MatrixUtility(np.array(THREE_POINT_UTILITY))


@pytest.fixture
def three_point_dist():
    """P = (0.5, 0.3, 0.2)."""
    return Categorical.from_probs(THREE_POINT_PROBS)


@pytest.fixture
def small_spec():
    """A sweep small enough for the default test run."""
    return ExperimentSpec(
        space_size=30,
        dim=4,
        n_grid=[5, 20],
        d_grid=[50, 200],
        deltas=[0.01, 0.1],
        seeds=3,
        master_seed=7,
    )


@pytest.fixture
def write_text(tmp_path):
    """Write a text file under tmp_path and return its path."""

    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
