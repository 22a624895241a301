"""Emission of standalone matplotlib scripts for the regret and crossover figures.

Figures are not rendered in-process: the lab writes a CSV and a small
script that reads it. Each script names the CSV columns it uses, and
emission fails if any of them is missing from the CSV header.
"""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path
from typing import Any

import structlog

from mbr_regret.errors import ResultsFileError

logger = structlog.get_logger(__name__)

REGRET_PLOT_COLUMNS = (
    "n",
    "D",
    "delta_config",
    "temperature",
    "noise_scale",
    "bound_mbr",
    "bound3_mean",
    "regret_n_median",
    "bound_map",
    "regret_map_median",
)

CROSSOVER_PLOT_COLUMNS = ("n", "D", "delta", "difference", "case3")

_REGRET_SCRIPT = '''"""Regret vs bound curves: one bound series per delta plus the empirical median regret."""

import csv
import sys

import matplotlib.pyplot as plt

SUMMARY = {summary!r}
OUTPUT = {output!r}


def number(text):
    return float(text) if text else None


with open(SUMMARY, newline="") as f:
    rows = [r for r in csv.DictReader(f) if not r["temperature"] and not r["noise_scale"]]
if not rows:
    sys.exit("no base rows in " + SUMMARY)

# Sweeps with a single n and several |D| are plotted against |D|.
ns = sorted({{int(r["n"]) for r in rows}})
ds = sorted({{int(r["D"]) for r in rows if r["D"]}})
axis = "D" if len(ns) == 1 and len(ds) > 1 else "n"
deltas = sorted({{float(r["delta_config"]) for r in rows}})

fig, panels = plt.subplots(1, 2, figsize=(11, 4))
for panel, bound_column, regret_column, title in (
    (panels[0], ("bound_mbr", "bound3_mean"), "regret_n_median", "MBR"),
    (panels[1], ("bound_map",), "regret_map_median", "MAP"),
):
    for delta in deltas:
        points = sorted(
            (int(r[axis]), next((number(r[c]) for c in bound_column if r[c]), None))
            for r in rows
            if float(r["delta_config"]) == delta and r[axis]
        )
        points = [(x, y) for x, y in points if y is not None]
        if points:
            panel.plot(*zip(*points), marker="o", label=f"bound (delta={{delta:g}})")
    first = [r for r in rows if float(r["delta_config"]) == deltas[0] and r[axis]]
    empirical = sorted((int(r[axis]), float(r[regret_column])) for r in first)
    panel.plot(*zip(*empirical), marker="s", color="black", label="empirical regret (median)")
    panel.set_xscale("log")
    panel.set_xlabel(axis)
    panel.set_ylabel("regret")
    panel.set_title(title)
    panel.legend()

fig.tight_layout()
fig.savefig(OUTPUT, dpi=150)
print("wrote", OUTPUT)
'''

_CROSSOVER_SCRIPT = '''"""Region where the MBR bound is below the MAP bound, per delta."""

import csv

import matplotlib.pyplot as plt

CROSSOVER = {crossover!r}
OUTPUT = {output!r}

with open(CROSSOVER, newline="") as f:
    rows = list(csv.DictReader(f))

deltas = sorted({{float(r["delta"]) for r in rows}})
fig, panels = plt.subplots(1, len(deltas), figsize=(5 * len(deltas), 4), squeeze=False)
for panel, delta in zip(panels[0], deltas):
    subset = [r for r in rows if float(r["delta"]) == delta]
    mbr_wins = [(int(r["n"]), int(r["D"])) for r in subset if r["case3"] == "true"]
    map_wins = [(int(r["n"]), int(r["D"])) for r in subset if r["case3"] != "true"]
    if mbr_wins:
        panel.scatter(*zip(*mbr_wins), marker="o", label="MBR bound smaller")
    if map_wins:
        panel.scatter(*zip(*map_wins), marker="x", label="MAP bound smaller")
    panel.set_xscale("log")
    panel.set_yscale("log")
    panel.set_xlabel("n")
    panel.set_ylabel("|D|")
    panel.set_title(f"delta={{delta:g}}")
    panel.legend()

fig.tight_layout()
fig.savefig(OUTPUT, dpi=150)
print("wrote", OUTPUT)
'''


def _check_columns(header: Sequence[str], required: Sequence[str], csv_name: str) -> None:
    missing = [column for column in required if column not in header]
    if missing:
        raise ResultsFileError(f"{csv_name} lacks columns used by the plot script: {missing}")


def _write_script(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ResultsFileError(f"Failed to write {path}: {e}") from e
    return path


def emit_regret_plot(
    script_path: str | Path, summary_csv: str, header: Sequence[str], image: str = "regret.png"
) -> dict[str, Any]:
    """Write the regret-vs-bound script reading ``summary_csv`` (relative to the script's cwd)."""
    _check_columns(header, REGRET_PLOT_COLUMNS, summary_csv)
    path = _write_script(script_path, _REGRET_SCRIPT.format(summary=summary_csv, output=image))
    logger.info("plot_script_written", path=str(path), data=summary_csv)
    return {"path": str(path), "columns": list(REGRET_PLOT_COLUMNS)}


def emit_crossover_plot(
    script_path: str | Path, crossover_csv: str, header: Sequence[str], image: str = "crossover.png"
) -> dict[str, Any]:
    """Write the crossover-region script reading ``crossover_csv``."""
    _check_columns(header, CROSSOVER_PLOT_COLUMNS, crossover_csv)
    path = _write_script(
        script_path, _CROSSOVER_SCRIPT.format(crossover=crossover_csv, output=image)
    )
    logger.info("plot_script_written", path=str(path), data=crossover_csv)
    return {"path": str(path), "columns": list(CROSSOVER_PLOT_COLUMNS)}
