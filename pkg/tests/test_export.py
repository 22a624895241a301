"""Tests for CSV export, results reading, summaries and plot scripts."""

import csv

import numpy as np
import pytest

from mbr_regret.bounds import evaluate_bounds
from mbr_regret.decoding import TrialSpec, measure_regret
from mbr_regret.errors import DistributionError, ResultsFileError
from mbr_regret.models import BoundInputs, ExperimentSpec, SweepRow
from mbr_regret.simulation import run_crossover_study, run_sweep
from mbr_regret.tools.export import (
    CROSSOVER_COLUMNS,
    RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    append_regret_report,
    format_value,
    read_distribution,
    read_matrix,
    write_bound_table,
    write_crossover,
    write_distribution,
    write_matrix,
    write_results,
    write_summary,
)
from mbr_regret.tools.plots import emit_crossover_plot, emit_regret_plot
from mbr_regret.tools.report import read_results, summarize_rows


def _row(**overrides):
    values = dict(
        seed=0,
        n=10,
        D=100,
        delta_config=0.1,
        regret_n=0.1,
        regret_map=0.0,
        bound_mbr=1.5,
        violation_mbr=False,
        mbr_vs_map_human=0.0,
        mbr_vs_map_model=0.0,
        map_vs_mbr_human=0.0,
        map_vs_mbr_model=0.0,
    )
    values.update(overrides)
    return SweepRow(**values)


def _header(path):
    with open(path, newline="") as f:
        return next(csv.reader(f))


class TestFormatValue:
    """Tests for CSV cell formatting."""

    def test_cells(self):
        assert format_value(None) == ""
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value(3) == "3"
        assert float(format_value(0.1 + 0.2)) == 0.1 + 0.2

    def test_precision(self):
        assert format_value(1 / 3, precision=12) == "0.333333333333"


class TestDistributionFiles:
    """Tests for index,probability files."""

    def test_write_then_read(self, tmp_path, three_point_dist):
        path = tmp_path / "p.csv"
        write_distribution(three_point_dist, path)
        assert read_distribution(path).allclose(three_point_dist)

    def test_normalization_violated(self, write_text):
        path = write_text("bad.csv", "index,probability\n0,0.5\n1,0.4\n")
        with pytest.raises(DistributionError, match="normalization violated"):
            read_distribution(path)

    def test_missing_header(self, write_text):
        path = write_text("bad.csv", "0,0.5\n1,0.5\n")
        with pytest.raises(ResultsFileError, match="index,probability"):
            read_distribution(path)

    def test_malformed_entry(self, write_text):
        path = write_text("bad.csv", "index,probability\n0,0.5\n1,abc\n")
        with pytest.raises(ResultsFileError, match="line 3: malformed entry"):
            read_distribution(path)

    def test_duplicate_index(self, write_text):
        path = write_text("bad.csv", "index,probability\n0,0.5\n0,0.5\n")
        with pytest.raises(ResultsFileError, match="duplicate index"):
            read_distribution(path)

    def test_gap_in_indices(self, write_text):
        path = write_text("bad.csv", "index,probability\n0,0.5\n2,0.5\n")
        with pytest.raises(ResultsFileError, match="indices must cover"):
            read_distribution(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ResultsFileError):
            read_distribution(tmp_path / "missing.csv")


class TestMatrixFiles:
    """Tests for utility matrix files."""

    def test_write_then_read(self, tmp_path):
        values = np.array([[1.0, 0.25], [0.25, 1.0]])
        write_matrix(values, tmp_path / "u.csv")
        assert np.array_equal(read_matrix(tmp_path / "u.csv"), values)

    def test_not_square(self, write_text):
        with pytest.raises(ResultsFileError, match="square"):
            read_matrix(write_text("u.csv", "1,0.5\n0.5,1\n0.1,0.1\n"))

    def test_non_finite(self, write_text):
        with pytest.raises(ResultsFileError, match="line 2: non-finite"):
            read_matrix(write_text("u.csv", "1,0.5\nnan,1\n"))


class TestResultsFiles:
    """Tests for results files and summaries."""

    def test_results_reproduce_summary(self, tmp_path, small_spec):
        result = run_sweep(small_spec)
        path = tmp_path / "results.csv"
        write_results(result.rows, path)
        rows = read_results(path)
        assert rows == result.rows
        assert summarize_rows(rows) == result.summary

    def test_header(self, tmp_path):
        write_results([_row()], tmp_path / "results.csv")
        assert _header(tmp_path / "results.csv") == RESULT_COLUMNS

    def test_bad_row_line_number(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results([_row(), _row(seed=1)], path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2].replace("0.10000000000000001", "oops", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ResultsFileError, match="line 3"):
            read_results(path)

    def test_field_count_mismatch(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results([_row()], path)
        path.write_text(path.read_text() + "1,2,3\n")
        with pytest.raises(ResultsFileError, match="line 3: expected"):
            read_results(path)

    def test_missing_columns(self, write_text):
        with pytest.raises(ResultsFileError, match="line 1: missing columns"):
            read_results(write_text("results.csv", "seed,n\n0,1\n"))

    def test_empty_file(self, write_text):
        with pytest.raises(ResultsFileError, match="line 1: missing header"):
            read_results(write_text("results.csv", ""))

    def test_header_only(self, tmp_path):
        write_results([], tmp_path / "results.csv")
        assert read_results(tmp_path / "results.csv") == []
        assert summarize_rows([]) == []

    def test_summary_statistics(self):
        rows = [
            _row(seed=0, regret_n=0.1, violation_mbr=False),
            _row(seed=1, regret_n=0.2, violation_mbr=False),
            _row(seed=2, regret_n=0.6, violation_mbr=True, bound_mbr=0.5),
        ]
        (point,) = summarize_rows(rows)
        assert point.seeds == 3
        assert point.regret_n_mean == pytest.approx(0.3)
        assert point.regret_n_median == pytest.approx(0.2)
        assert point.violation_rate_mbr == pytest.approx(1 / 3)
        assert point.bound_mbr == pytest.approx((1.5 + 1.5 + 0.5) / 3)
        assert point.gap_median == pytest.approx(1.3)
        assert point.bound3_mean is None

    def test_summary_groups_variants(self):
        rows = [
            _row(),
            _row(temperature=0.5, regret_t=0.2),
            _row(seed=1, temperature=0.5, regret_t=0.4),
        ]
        summary = summarize_rows(rows)
        assert [(p.temperature, p.seeds) for p in summary] == [(None, 1), (0.5, 2)]
        assert summary[1].regret_t_median == pytest.approx(0.3)

    def test_write_summary_header(self, tmp_path):
        write_summary(summarize_rows([_row()]), tmp_path / "summary.csv")
        assert _header(tmp_path / "summary.csv") == SUMMARY_COLUMNS


class TestOtherTables:
    """Tests for bound, crossover and report tables."""

    def test_bound_table(self, tmp_path):
        report = evaluate_bounds(BoundInputs(n=100, dim=4, delta=0.01))
        write_bound_table([report], tmp_path / "bounds.csv")
        with open(tmp_path / "bounds.csv", newline="") as f:
            records = list(csv.DictReader(f))
        heart = next(r for r in records if r["bound_name"] == "lemma_heart")
        assert float(heart["value"]) == pytest.approx(1.49153, abs=1e-5)
        assert heart["D"] == ""
        assert heart["terms"].startswith("sample_n=")

    def test_crossover_table(self, tmp_path):
        rows = run_crossover_study(ExperimentSpec(n_grid=[10, 1000], d_grid=[100], deltas=[0.1]))
        write_crossover(rows, tmp_path / "crossover.csv")
        assert _header(tmp_path / "crossover.csv") == CROSSOVER_COLUMNS

    def test_append_regret_report(self, tmp_path, three_point_utility, three_point_dist):
        report = measure_regret(
            TrialSpec(three_point_dist, three_point_utility, n=5, seed=1, d_size=10)
        )
        path = tmp_path / "reports.csv"
        append_regret_report(report, path)
        append_regret_report(report, path, delta=0.1)
        lines = path.read_text().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("seed,n,D,delta_config,regret_n,regret_map,regret_u,regret_t,")
        assert "d_size" not in lines[0]
        with open(path, newline="") as f:
            first, second = list(csv.DictReader(f))
        assert first["D"] == "10"
        assert first["delta_config"] == ""
        assert second["delta_config"] == "0.10000000000000001"
        assert int(first["y_hat"]) == report.y_hat


class TestPlotScripts:
    """Tests for emitted plot scripts."""

    def test_regret_script(self, tmp_path):
        header = SUMMARY_COLUMNS
        info = emit_regret_plot(tmp_path / "plot_regret.py", "summary.csv", header)
        text = (tmp_path / "plot_regret.py").read_text()
        compile(text, "plot_regret.py", "exec")
        assert "'summary.csv'" in text
        assert set(info["columns"]) <= set(header)

    def test_crossover_script(self, tmp_path):
        emit_crossover_plot(tmp_path / "plot_crossover.py", "crossover.csv", CROSSOVER_COLUMNS)
        compile((tmp_path / "plot_crossover.py").read_text(), "plot_crossover.py", "exec")

    def test_missing_column(self, tmp_path):
        header = [c for c in SUMMARY_COLUMNS if c != "bound_map"]
        with pytest.raises(ResultsFileError, match="bound_map"):
            emit_regret_plot(tmp_path / "plot_regret.py", "summary.csv", header)
