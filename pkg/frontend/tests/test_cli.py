"""Command line rendering entry point."""

import pytest

from iov_plots.cli import EXIT_OK, EXIT_USAGE, main
from iov_plots.figures import CSV_HEADER, FIGURES

HEADER = ",".join(CSV_HEADER)

SAMPLE = f"""{HEADER}
100,proposed,0.3,0.1,0.01,5000.0,0.02,3.0,58.0
100,la-v2v,0.5,0.05,0.02,2500.0,0.03,2.5,42.0
"""


@pytest.fixture
def sample_csv(tmp_path):
    path = tmp_path / "results.csv"
    path.write_text(SAMPLE)
    return path


def test_render_all_figures(sample_csv, tmp_path, capsys):
    out = tmp_path / "figs"
    code = main(["render", "--csv", str(sample_csv), "--out", str(out)])
    assert code == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(s.filename for s in FIGURES)
    stdout = capsys.readouterr().out
    assert stdout.count("wrote") == len(FIGURES)


def test_render_single_metric(sample_csv, tmp_path, capsys):
    out = tmp_path / "figs"
    code = main(["render", "--csv", str(sample_csv), "--out", str(out), "--metric", "pdr"])
    assert code == EXIT_OK
    assert [p.name for p in out.iterdir()] == ["pdr.png"]
    assert "pdr.png" in capsys.readouterr().out


def test_unknown_metric_is_usage_error(sample_csv, tmp_path, capsys):
    code = main(["render", "--csv", str(sample_csv), "--out", str(tmp_path / "f"),
                 "--metric", "bogus"])
    assert code == EXIT_USAGE
    assert "bogus" in capsys.readouterr().err


def test_missing_csv_is_usage_error(tmp_path, capsys):
    code = main(["render", "--csv", str(tmp_path / "absent.csv"),
                 "--out", str(tmp_path / "f")])
    assert code == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_malformed_header_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("vehicles,scheme\n100,proposed\n")
    code = main(["render", "--csv", str(bad), "--out", str(tmp_path / "f")])
    assert code == EXIT_USAGE
    assert "column" in capsys.readouterr().err


def test_no_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
