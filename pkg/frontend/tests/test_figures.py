"""Figure construction, schema validation, and value fidelity."""

import math

import numpy as np
import pytest

from iov_plots.figures import (
    CSV_HEADER,
    FIGURES,
    FigureSpec,
    SchemaError,
    build_figure,
    read_table,
    render_all,
    render_one,
)

HEADER = ",".join(CSV_HEADER)

# two algorithms over three densities; the second algorithm never delivers
# at density 50, so its delay/path cells (and one composite) are gaps
SAMPLE = f"""{HEADER}
50,proposed,0.5,0.04,0.012,1500.0,0.021,2.5,61.0
50,mrl,0.9,0.0,,0.0,,,39.0
200,proposed,0.1,0.2,0.01,9000.0,0.019,3.5,70.0
200,mrl,0.4,0.05,0.02,2000.0,0.03,2.0,
500,proposed,0.01,0.13,0.011,8000.0,0.017,4.4,64.0
500,mrl,0.05,0.08,0.018,4500.0,0.02,2.1,36.0
"""


@pytest.fixture
def sample_csv(tmp_path):
    path = tmp_path / "results.csv"
    path.write_text(SAMPLE)
    return path


@pytest.fixture
def header_only_csv(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(HEADER + "\n")
    return path


class TestReadTable:
    def test_types_and_gaps(self, sample_csv):
        rows = read_table(sample_csv)
        assert len(rows) == 6
        assert rows[0]["n_vehicles"] == 50
        assert rows[0]["algorithm"] == "proposed"
        assert rows[0]["pdr"] == 0.04
        assert rows[1]["ber_mean"] is None
        assert rows[1]["delay_mean_s"] is None
        assert rows[3]["composite_score"] is None

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "short.csv"
        trimmed = [c for c in CSV_HEADER if c != "ber_mean"]
        path.write_text(",".join(trimmed) + "\n")
        with pytest.raises(SchemaError, match="ber_mean"):
            read_table(path)

    def test_unexpected_column_named(self, tmp_path):
        path = tmp_path / "extra.csv"
        path.write_text(HEADER + ",jitter\n")
        with pytest.raises(SchemaError, match="jitter"):
            read_table(path)

    def test_reordered_columns_rejected(self, tmp_path):
        path = tmp_path / "reordered.csv"
        shuffled = (CSV_HEADER[1], CSV_HEADER[0], *CSV_HEADER[2:])
        path.write_text(",".join(shuffled) + "\n")
        with pytest.raises(SchemaError):
            read_table(path)


class TestFigureSpec:
    def test_registry_covers_seven_figures(self):
        assert len(FIGURES) == 7
        assert [s.kind for s in FIGURES].count("bar") == 1
        assert all(s.filename.endswith(".png") for s in FIGURES)

    def test_unknown_metric_rejected(self):
        with pytest.raises(SchemaError, match="jitter"):
            FigureSpec("jitter", "y", "jitter.png")


class TestLineCharts:
    def test_plotted_values_equal_csv(self, sample_csv):
        rows = read_table(sample_csv)
        spec = next(s for s in FIGURES if s.metric == "pdr")
        ax = build_figure(rows, spec).axes[0]
        by_label = {line.get_label(): line for line in ax.lines}
        assert set(by_label) == {"proposed", "mrl"}
        assert list(by_label["proposed"].get_xdata()) == [50.0, 200.0, 500.0]
        assert list(by_label["proposed"].get_ydata()) == [0.04, 0.2, 0.13]
        assert list(by_label["mrl"].get_ydata()) == [0.0, 0.05, 0.08]

    def test_absent_values_are_gaps_not_zeros(self, sample_csv):
        rows = read_table(sample_csv)
        spec = next(s for s in FIGURES if s.metric == "delay_mean_s")
        ax = build_figure(rows, spec).axes[0]
        mrl = {line.get_label(): line for line in ax.lines}["mrl"]
        y = list(mrl.get_ydata())
        assert math.isnan(y[0])  # undelivered point stays a hole
        assert y[1:] == [0.03, 0.02]
        assert 0.0 not in y

    def test_single_algorithm_single_series(self, tmp_path):
        path = tmp_path / "solo.csv"
        path.write_text(HEADER + "\n100,proposed,0.2,0.1,0.01,5000.0,0.02,3.0,\n")
        rows = read_table(path)
        spec = next(s for s in FIGURES if s.metric == "throughput_bps")
        ax = build_figure(rows, spec).axes[0]
        assert len(ax.lines) == 1
        assert ax.lines[0].get_label() == "proposed"


class TestBarChart:
    def test_heights_equal_csv_composites(self, sample_csv):
        rows = read_table(sample_csv)
        spec = next(s for s in FIGURES if s.metric == "composite_score")
        ax = build_figure(rows, spec).axes[0]
        heights = sorted(p.get_height() for p in ax.patches)
        expected = sorted(
            row["composite_score"] for row in rows
            if row["composite_score"] is not None
        )
        assert heights == expected

    def test_absent_composite_draws_no_bar(self, sample_csv):
        rows = read_table(sample_csv)
        spec = next(s for s in FIGURES if s.metric == "composite_score")
        ax = build_figure(rows, spec).axes[0]
        # six table rows, one gap: five bars, and none of height zero
        assert len(ax.patches) == 5
        assert all(p.get_height() > 0 for p in ax.patches)


class TestRendering:
    def test_render_all_writes_seven_pngs(self, sample_csv, tmp_path):
        out = tmp_path / "figs"
        written = render_all(sample_csv, out)
        assert [p.name for p in written] == [s.filename for s in FIGURES]
        for path in written:
            assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_header_only_csv_renders_valid_empty_figures(self, header_only_csv, tmp_path):
        written = render_all(header_only_csv, tmp_path / "figs")
        assert len(written) == 7
        for path in written:
            assert path.stat().st_size > 0
            assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_render_one_named_metric(self, sample_csv, tmp_path):
        out = tmp_path / "pdr.png"
        assert render_one(sample_csv, "pdr", out) == out
        assert out.exists()

    def test_render_one_unknown_metric(self, sample_csv, tmp_path):
        with pytest.raises(SchemaError, match="bogus"):
            render_one(sample_csv, "bogus", tmp_path / "x.png")

    def test_same_table_renders_identical_bytes(self, sample_csv, tmp_path):
        a = render_one(sample_csv, "composite_score", tmp_path / "a.png")
        b = render_one(sample_csv, "composite_score", tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()

    def test_csv_is_never_mutated(self, sample_csv, tmp_path):
        before = sample_csv.read_bytes()
        render_all(sample_csv, tmp_path / "figs")
        assert sample_csv.read_bytes() == before


def test_numeric_round_trip_precision(tmp_path):
    # repr-precision floats survive read_table exactly
    value = 0.123456789012345678
    path = tmp_path / "p.csv"
    path.write_text(HEADER + f"\n100,proposed,{value!r},0.1,0.01,5e3,0.02,3.0,\n")
    rows = read_table(path)
    assert rows[0]["interruptions_mean"] == float(repr(value))
    assert np.isfinite(rows[0]["throughput_bps"])
