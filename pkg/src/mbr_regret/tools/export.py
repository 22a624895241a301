"""CSV persistence for distributions, utility matrices and experiment results.

Floats in results files are written with 17 significant digits so that a
results file read back yields bit-identical values; distribution and matrix
files use the shorter table precision.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel

from mbr_regret.config import config
from mbr_regret.errors import DistributionError, ResultsFileError
from mbr_regret.models import (
    BoundReport,
    CrossoverRow,
    Observation1Row,
    PointSummary,
    RegretReport,
    SweepRow,
)
from mbr_regret.space import Categorical, HypothesisSpace
from mbr_regret.transport import TransportResult

logger = structlog.get_logger(__name__)

RESULT_COLUMNS = list(SweepRow.model_fields)
SUMMARY_COLUMNS = list(PointSummary.model_fields)
CROSSOVER_COLUMNS = list(CrossoverRow.model_fields)
OBSERVATION1_COLUMNS = list(Observation1Row.model_fields)
# Leading columns follow the results-file key order; the rest are RegretReport fields.
_REPORT_KEY_COLUMNS = ["seed", "n", "D", "delta_config"]
REGRET_REPORT_COLUMNS = _REPORT_KEY_COLUMNS + [
    name for name in RegretReport.model_fields if name not in ("seed", "n", "d_size")
]
BOUND_TABLE_COLUMNS = ["n", "D", "d", "delta", "bound_name", "value", "terms"]


def format_value(value: Any, precision: int | None = None) -> str:
    """CSV cell text: empty for None, lowercase booleans, ``%.{precision}g`` floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float | np.floating):
        return format(float(value), f".{precision or config.csv_precision}g")
    if hasattr(value, "value"):  # enums
        return str(value.value)
    return str(value)


def _write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        logger.error("csv_write_failed", path=str(path), error=str(e), exc_info=True)
        raise ResultsFileError(f"Failed to write {path}: {e}") from e
    return path


def write_models(
    models: Sequence[BaseModel], path: str | Path, columns: Sequence[str]
) -> dict[str, Any]:
    """Write pydantic records as CSV rows in ``columns`` order.

    Args:
        models: Records to write.
        path: Output CSV; parent directories are created.
        columns: Attribute names, also used as the header.

    Returns:
        The path and the number of rows written.

    Raises:
        ResultsFileError: If the file cannot be written.
    """
    rows = (
        [format_value(getattr(model, column)) for column in columns] for model in models
    )
    path = _write_csv(path, columns, rows)
    logger.info("csv_written", path=str(path), rows=len(models))
    return {"path": str(path), "rows": len(models)}


def write_results(rows: Sequence[SweepRow], path: str | Path) -> dict[str, Any]:
    return write_models(rows, path, RESULT_COLUMNS)


def write_summary(summary: Sequence[PointSummary], path: str | Path) -> dict[str, Any]:
    return write_models(summary, path, SUMMARY_COLUMNS)


def write_crossover(rows: Sequence[CrossoverRow], path: str | Path) -> dict[str, Any]:
    return write_models(rows, path, CROSSOVER_COLUMNS)


def write_observation1(rows: Sequence[Observation1Row], path: str | Path) -> dict[str, Any]:
    return write_models(rows, path, OBSERVATION1_COLUMNS)


def append_regret_report(
    report: RegretReport, path: str | Path, delta: float | None = None
) -> dict[str, Any]:
    """Append one report row, writing the header when the file is new.

    Args:
        report: Measured regrets of one trial.
        path: CSV file; created with a header if missing or empty.
        delta: Confidence level the trial belongs to, if any.

    Returns:
        The path and the number of rows written.

    Raises:
        ResultsFileError: If the file cannot be written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_file = not path.exists() or path.stat().st_size == 0
    cells = report.model_dump()
    cells.update(D=report.d_size, delta_config=delta)
    try:
        with open(path, "a", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            if new_file:
                writer.writerow(REGRET_REPORT_COLUMNS)
            writer.writerow([format_value(cells[column]) for column in REGRET_REPORT_COLUMNS])
    except OSError as e:
        raise ResultsFileError(f"Failed to write {path}: {e}") from e
    return {"path": str(path), "rows": 1}


def write_bound_table(reports: Sequence[BoundReport], path: str | Path) -> dict[str, Any]:
    """Long-format bound table: one line per (parameter tuple, bound)."""
    rows = []
    for report in reports:
        inputs = report.inputs
        for name, bound in report.bounds.items():
            terms = ";".join(
                f"{term.label}={format_value(term.value)}" for term in bound.terms
            )
            rows.append(
                [
                    str(inputs.n),
                    format_value(inputs.d_size),
                    str(inputs.dim),
                    format_value(inputs.delta),
                    name,
                    format_value(bound.value),
                    terms,
                ]
            )
    path = _write_csv(path, BOUND_TABLE_COLUMNS, rows)
    return {"path": str(path), "rows": len(rows)}


def write_coupling(result: TransportResult, size: int, path: str | Path) -> dict[str, Any]:
    """Nonzero coupling entries as ``row,col,mass`` in the full index space."""
    coupling = result.coupling
    rows = []
    for i, j in zip(*np.nonzero(coupling.gamma), strict=True):
        rows.append(
            [
                str(int(coupling.rows[i])),
                str(int(coupling.cols[j])),
                format_value(float(coupling.gamma[i, j])),
            ]
        )
    path = _write_csv(path, ["row", "col", "mass"], rows)
    logger.info("coupling_written", path=str(path), entries=len(rows), size=size)
    return {"path": str(path), "rows": len(rows)}


def _read_lines(path: str | Path) -> list[list[str]]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            return [row for row in csv.reader(f) if row and not row[0].startswith("#")]
    except OSError as e:
        raise ResultsFileError(f"Cannot read {path}: {e}") from e


def write_distribution(dist: Categorical, path: str | Path) -> dict[str, Any]:
    """Write ``index,probability`` lines."""
    rows = (
        [str(i), format_value(float(p), config.table_precision)]
        for i, p in enumerate(dist.probs)
    )
    path = _write_csv(path, ["index", "probability"], rows)
    return {"path": str(path), "rows": dist.space.size}


def read_distribution(path: str | Path) -> Categorical:
    """Read an ``index,probability`` file covering indices ``0..N-1`` exactly once.

    Args:
        path: Distribution CSV.

    Returns:
        The distribution over a space of size ``N``.

    Raises:
        ResultsFileError: If the file is unreadable or malformed.
        DistributionError: If the probabilities are negative or do not sum to 1.
    """
    lines = _read_lines(path)
    if not lines or [c.strip() for c in lines[0]] != ["index", "probability"]:
        raise ResultsFileError(f"{path}: expected header 'index,probability'")

    entries: dict[int, float] = {}
    for lineno, row in enumerate(lines[1:], start=2):
        try:
            index, probability = int(row[0]), float(row[1])
        except (IndexError, ValueError) as e:
            raise ResultsFileError(f"{path}: line {lineno}: malformed entry {row!r}") from e
        if index in entries:
            raise ResultsFileError(f"{path}: line {lineno}: duplicate index {index}")
        entries[index] = probability

    if not entries or sorted(entries) != list(range(len(entries))):
        raise ResultsFileError(f"{path}: indices must cover 0..N-1 exactly once")
    probs = np.array([entries[i] for i in range(len(entries))])
    try:
        return Categorical(HypothesisSpace(len(entries)), probs)
    except DistributionError as e:
        raise DistributionError(f"{path}: {e}") from e


def write_matrix(values: np.ndarray, path: str | Path) -> dict[str, Any]:
    """Write a square matrix as headerless CSV rows."""
    rows = ([format_value(float(x), config.table_precision) for x in row] for row in values)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            csv.writer(f, lineterminator="\n").writerows(rows)
    except OSError as e:
        raise ResultsFileError(f"Failed to write {path}: {e}") from e
    return {"path": str(path), "rows": int(values.shape[0])}


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a square matrix of finite floats."""
    lines = _read_lines(path)
    values = []
    for lineno, row in enumerate(lines, start=1):
        try:
            parsed = [float(x) for x in row]
        except ValueError as e:
            raise ResultsFileError(f"{path}: line {lineno}: non-numeric entry") from e
        if not all(math.isfinite(x) for x in parsed):
            raise ResultsFileError(f"{path}: line {lineno}: non-finite entry")
        values.append(parsed)
    if not values or any(len(row) != len(values) for row in values):
        raise ResultsFileError(f"{path}: matrix must be square and nonempty")
    return np.array(values)
