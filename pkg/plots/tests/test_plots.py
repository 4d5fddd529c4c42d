"""Figure spec parsing, aggregation parity, and rendering checks."""

import csv
import shutil
import subprocess
from statistics import stdev

import pytest

plots = pytest.importorskip("plots")
pytest.importorskip("matplotlib")

from plots import SpecError, aggregate, parse_figure_spec, render_figures
from plots.cli import main

HEADER = ["episode", "disc_return", "steps", "time_per_step_s", "gamma_calls", "seed"]


def write_csv(path, returns, times=None):
    times = times or [0.5] * len(returns)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(HEADER)
        for k, (ret, t) in enumerate(zip(returns, times)):
            writer.writerow([k, repr(float(ret)), 10 + k, repr(float(t)), 3, 100 + k])
    return path


@pytest.fixture
def three_series_spec(tmp_path):
    """Three labeled series over three numeric x positions."""
    chunks = []
    for label, base in (("none", 5.0), ("pref", 8.0), ("timed", 11.0)):
        pairs = []
        for x in (5, 7, 11):
            path = write_csv(tmp_path / f"{label}_{x}.csv", [base + x, base + x + 2, base + x - 1])
            pairs.append(f"{x}: {path}")
        chunks.append(f"series_{label} = {', '.join(pairs)}")
    text = "\n".join(
        ["title = Returns", "x = grid size", "metrics = disc_return, time_per_step_s"] + chunks
    )
    return text, tmp_path


# ------------------------------------------------------------- spec parsing


def test_spec_parses_labels_points_and_defaults(three_series_spec):
    text, _ = three_series_spec
    spec = parse_figure_spec(text)
    assert [s.label for s in spec.series] == ["none", "pref", "timed"]
    assert all(len(s.points) == 3 for s in spec.series)
    assert spec.metrics == ("disc_return", "time_per_step_s")
    assert spec.image_format == "png"
    assert spec.stem == "figure"


@pytest.mark.parametrize(
    "mutation, fragment",
    [
        (lambda t: t + "\ntitle = twice", "duplicate key"),
        (lambda t: t + "\nmystery = 1", "unknown keys"),
        (lambda t: t.replace("disc_return, time_per_step_s", "episode"), "metrics"),
        (lambda t: t.replace("series_none", "series_"), "empty label"),
        (lambda t: "title = only a title", "at least one series"),
        (lambda t: t + "\nseries_bad = no-colon-here.csv", "pair"),
        (lambda t: t + "\nformat = bmp", "format"),
    ],
)
def test_spec_rejects_malformed_input(three_series_spec, mutation, fragment):
    text, _ = three_series_spec
    with pytest.raises(SpecError, match=fragment):
        parse_figure_spec(mutation(text))


def test_spec_requires_existing_files(three_series_spec):
    text, _ = three_series_spec
    with pytest.raises(SpecError, match="missing input files"):
        parse_figure_spec(text + "\nseries_ghost = 5: /nonexistent/gone.csv")


# -------------------------------------------------------------- aggregation


def test_aggregate_mean_and_sample_std(tmp_path):
    path = write_csv(tmp_path / "r.csv", [10.0, 20.0])
    mean, std = aggregate(path, "disc_return")
    assert mean == 15.0
    assert std == stdev([10.0, 20.0])


def test_aggregate_single_row_zero_spread(tmp_path):
    path = write_csv(tmp_path / "one.csv", [4.25])
    assert aggregate(path, "disc_return") == (4.25, 0.0)


def test_aggregate_rejects_schema_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("episode,steps\n0,4\n")
    with pytest.raises(SpecError, match="disc_return"):
        aggregate(path, "disc_return")
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(HEADER) + "\n")
    with pytest.raises(SpecError, match="no data rows"):
        aggregate(empty, "disc_return")


def test_aggregates_match_benchmark_summarizer(tmp_path):
    """The harness' summarize and this package must agree to 1e-9."""
    if shutil.which("macroplan") is None:
        pytest.skip("benchmark harness not installed")
    returns = [3.25, -1.5, 10.125, 4.0625]
    times = [0.25, 0.5, 0.125, 0.375]
    path = write_csv(tmp_path / "batch.csv", returns, times)
    out = tmp_path / "summary.csv"
    subprocess.run(
        ["macroplan", "summarize", str(path), "--out", str(out)],
        check=True,
        capture_output=True,
        text=True,
    )
    with open(out, newline="") as handle:
        row = next(csv.DictReader(handle))
    ret_mean, ret_std = aggregate(path, "disc_return")
    time_mean, time_std = aggregate(path, "time_per_step_s")
    assert abs(ret_mean - float(row["return_mean"])) <= 1e-9
    assert abs(ret_std - float(row["return_std"])) <= 1e-9
    assert abs(time_mean - float(row["time_mean"])) <= 1e-9
    assert abs(time_std - float(row["time_std"])) <= 1e-9


# ---------------------------------------------------------------- rendering


def test_renders_one_image_per_metric(three_series_spec, tmp_path):
    text, _ = three_series_spec
    spec = parse_figure_spec(text)
    outdir = tmp_path / "figs"
    written, lines = render_figures(spec, outdir)
    assert [p.name for p in written] == ["figure_disc_return.png", "figure_time_per_step_s.png"]
    assert all(p.stat().st_size > 0 for p in written)
    # one aggregate line per (series, point, metric), series in sorted order
    assert len(lines) == 3 * 3 * 2
    assert lines[0].startswith("none\t5\tdisc_return\tmean=")


def test_aggregate_lines_are_deterministic(three_series_spec, tmp_path):
    text, _ = three_series_spec
    spec = parse_figure_spec(text)
    first = render_figures(spec, tmp_path / "a")[1]
    second = render_figures(spec, tmp_path / "b")[1]
    assert first == second


def test_aggregate_lines_match_aggregate(three_series_spec, tmp_path):
    text, _ = three_series_spec
    spec = parse_figure_spec(text)
    _, lines = render_figures(spec, tmp_path / "figs")
    for line in lines:
        label, x, metric, mean_part, std_part = line.split("\t")
        series = next(s for s in spec.series if s.label == label)
        point = next(p for p in series.points if p.x_text == x)
        mean, std = aggregate(point.path, metric)
        assert float(mean_part.removeprefix("mean=")) == mean
        assert float(std_part.removeprefix("std=")) == std


def test_categorical_axis_renders_grouped_bars(tmp_path):
    t = write_csv(tmp_path / "t.csv", [50.0, 60.0])
    n = write_csv(tmp_path / "n.csv", [30.0, 40.0])
    text = "\n".join(
        [
            "x = lower bound",
            "metrics = disc_return",
            "stem = bounds",
            f"series_timed = informed: {t}",
            f"series_trivial = informed: {n}",
        ]
    )
    spec = parse_figure_spec(text)
    written, lines = render_figures(spec, tmp_path / "figs")
    assert [p.name for p in written] == ["bounds_disc_return.png"]
    assert len(lines) == 2


def test_categorical_axis_rejects_mismatched_categories(tmp_path):
    a = write_csv(tmp_path / "a.csv", [1.0])
    b = write_csv(tmp_path / "b.csv", [2.0])
    text = "\n".join(
        [
            "metrics = disc_return",
            f"series_one = left: {a}",
            f"series_two = right: {b}",
        ]
    )
    with pytest.raises(SpecError, match="lacks categories"):
        render_figures(parse_figure_spec(text), tmp_path / "figs")


# ---------------------------------------------------------------------- cli


def test_cli_renders_and_reports(three_series_spec, tmp_path, capsys):
    text, _ = three_series_spec
    spec_path = tmp_path / "figure.spec"
    spec_path.write_text(text + "\n")
    outdir = tmp_path / "out"
    assert main(["--spec", str(spec_path), "--outdir", str(outdir)]) == 0
    out = capsys.readouterr().out
    assert out.count("wrote ") == 2
    assert (outdir / "figure_disc_return.png").is_file()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("series_x = 1: /nonexistent/gone.csv\n")
    assert main(["--spec", str(bad), "--outdir", str(tmp_path)]) == 1
    assert "spec error" in capsys.readouterr().err
    assert main(["--spec", str(tmp_path / "absent.spec"), "--outdir", str(tmp_path)]) == 1
    assert main(["--outdir", str(tmp_path)]) == 1  # usage error, not a crash
