"""MBR Regret Lab - Simulating MBR and MAP decoding regrets against their upper bounds."""

__version__ = "0.1.0"

from .models import (
    BoundInputs,
    BoundReport,
    DecodeResult,
    ExperimentSpec,
    RegretReport,
    SweepResult,
)

__all__ = [
    "BoundInputs",
    "BoundReport",
    "DecodeResult",
    "ExperimentSpec",
    "RegretReport",
    "SweepResult",
]
