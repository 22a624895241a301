"""Per-point summary statistics over sweep rows.

The aggregation runs in an in-memory DuckDB database on a single thread, so
a summary recomputed from a results file equals the one produced by the
sweep that wrote it.
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path

import duckdb
import structlog
from pydantic import ValidationError

from mbr_regret.errors import ResultsFileError
from mbr_regret.models import PointSummary, SweepRow
from mbr_regret.tools.export import RESULT_COLUMNS

logger = structlog.get_logger(__name__)

_TABLE_COLUMNS = {
    "ordinal": "BIGINT",
    "n": "BIGINT",
    "D": "BIGINT",
    "delta_config": "DOUBLE",
    "temperature": "DOUBLE",
    "noise_scale": "DOUBLE",
    "regret_n": "DOUBLE",
    "regret_map": "DOUBLE",
    "regret_u": "DOUBLE",
    "regret_t": "DOUBLE",
    "bound_mbr": "DOUBLE",
    "bound3": "DOUBLE",
    "bound_map": "DOUBLE",
    "bound_utility": "DOUBLE",
    "bound_temperature": "DOUBLE",
    "violation_mbr": "BOOLEAN",
    "violation_bound3": "BOOLEAN",
    "violation_map": "BOOLEAN",
    "violation_utility": "BOOLEAN",
    "violation_temperature": "BOOLEAN",
}

_SUMMARY_SQL = """
SELECT
  n,
  D,
  delta_config,
  temperature,
  noise_scale,
  count(*) AS seeds,
  avg(regret_n) AS regret_n_mean,
  quantile_cont(regret_n, 0.5) AS regret_n_median,
  avg(regret_map) AS regret_map_mean,
  quantile_cont(regret_map, 0.5) AS regret_map_median,
  avg(bound_mbr) AS bound_mbr,
  avg(bound3) AS bound3_mean,
  avg(bound_map) AS bound_map,
  quantile_cont(coalesce(bound_mbr, bound3) - regret_n, 0.5) AS gap_median,
  avg(violation_mbr::DOUBLE) AS violation_rate_mbr,
  avg(violation_bound3::DOUBLE) AS violation_rate_bound3,
  avg(violation_map::DOUBLE) AS violation_rate_map,
  quantile_cont(regret_u, 0.5) AS regret_u_median,
  avg(bound_utility) AS bound_utility_mean,
  avg(violation_utility::DOUBLE) AS violation_rate_utility,
  quantile_cont(regret_t, 0.5) AS regret_t_median,
  avg(bound_temperature) AS bound_temperature_mean,
  avg(violation_temperature::DOUBLE) AS violation_rate_temperature
FROM sweep_rows
GROUP BY n, D, delta_config, temperature, noise_scale
ORDER BY n, D NULLS FIRST, delta_config, temperature NULLS FIRST, noise_scale NULLS FIRST
"""


def summarize_rows(rows: Sequence[SweepRow]) -> list[PointSummary]:
    """Mean/median regret, mean bound and violation rate per grid point and variant."""
    if not rows:
        return []

    columns = list(_TABLE_COLUMNS)
    conn = duckdb.connect(":memory:")
    try:
        conn.execute("SET threads TO 1")
        schema = ", ".join(f'"{name}" {kind}' for name, kind in _TABLE_COLUMNS.items())
        conn.execute(f"CREATE TABLE sweep_rows ({schema})")
        placeholders = ", ".join("?" for _ in columns)
        conn.executemany(
            f"INSERT INTO sweep_rows VALUES ({placeholders})",
            [
                [ordinal, *(getattr(row, name) for name in columns[1:])]
                for ordinal, row in enumerate(rows)
            ],
        )
        cursor = conn.execute(_SUMMARY_SQL)
        names = [description[0] for description in cursor.description]
        records = cursor.fetchall()
    finally:
        conn.close()

    summary = [PointSummary(**dict(zip(names, record, strict=True))) for record in records]
    logger.debug("rows_summarized", rows=len(rows), points=len(summary))
    return summary


def read_results(path: str | Path) -> list[SweepRow]:
    """Parse a results CSV, reporting the line number of the first bad row."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise ResultsFileError(f"{path}: line 1: missing header")
            missing = [column for column in RESULT_COLUMNS if column not in header]
            if missing:
                raise ResultsFileError(f"{path}: line 1: missing columns {missing}")

            rows = []
            for record in reader:
                lineno = reader.line_num
                if not record:
                    continue
                if len(record) != len(header):
                    raise ResultsFileError(
                        f"{path}: line {lineno}: expected {len(header)} fields, got {len(record)}"
                    )
                values = {
                    name: (value if value != "" else None)
                    for name, value in zip(header, record, strict=True)
                    if name in SweepRow.model_fields
                }
                try:
                    rows.append(SweepRow.model_validate(values))
                except ValidationError as e:
                    raise ResultsFileError(f"{path}: line {lineno}: {e}") from e
    except OSError as e:
        raise ResultsFileError(f"Cannot read {path}: {e}") from e

    logger.info("results_read", path=str(path), rows=len(rows))
    return rows
