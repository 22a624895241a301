"""
Regret lab tools - config files, CSV export, summaries and plot scripts.
"""

from .config_file import apply_overrides, build_experiment_spec, load_config_file
from .export import read_distribution, read_matrix, write_results, write_summary
from .plots import emit_crossover_plot, emit_regret_plot
from .report import read_results, summarize_rows

__all__ = [
    "load_config_file",
    "apply_overrides",
    "build_experiment_spec",
    "read_distribution",
    "read_matrix",
    "write_results",
    "write_summary",
    "emit_regret_plot",
    "emit_crossover_plot",
    "read_results",
    "summarize_rows",
]
