"""Figure specs, CSV aggregation, and rendering.

A figure spec is a flat ``key = value`` file, one figure per file::

    title = Returns by grid size
    x = grid size
    metrics = disc_return, time_per_step_s
    format = png
    stem = rocksample
    series_timed = 7 : runs/timed_7.csv, 11 : runs/timed_11.csv
    series_none = 7 : runs/none_7.csv, 11 : runs/none_11.csv

Each ``series_<label>`` key lists the series' points as ``x : csv-path``
pairs.  When every x parses as a number the series are drawn as mean
lines with a +/- std band; otherwise x values are treated as categories
and drawn as grouped bars with std error bars.  One image is written per
metric, named ``<stem>_<metric>.<format>``.

Aggregation matches the benchmark harness' summarizer: arithmetic mean
and sample standard deviation (zero spread for a single episode).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean, stdev
from typing import Sequence

CSV_COLUMNS = ("episode", "disc_return", "steps", "time_per_step_s", "gamma_calls", "seed")
METRIC_COLUMNS = ("disc_return", "steps", "time_per_step_s", "gamma_calls")
DEFAULT_METRICS = ("disc_return", "time_per_step_s")
IMAGE_FORMATS = ("png", "svg", "pdf")


class SpecError(ValueError):
    """A figure spec that cannot be rendered."""


@dataclass(frozen=True)
class Point:
    x_text: str
    path: Path


@dataclass(frozen=True)
class Series:
    label: str
    points: tuple[Point, ...]


@dataclass(frozen=True)
class FigureSpec:
    title: str
    x_label: str
    metrics: tuple[str, ...]
    image_format: str
    stem: str
    series: tuple[Series, ...]


def _parse_flat(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {number}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise SpecError(f"line {number}: empty key")
        if key in entries:
            raise SpecError(f"line {number}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _parse_points(label: str, value: str) -> tuple[Point, ...]:
    points = []
    for chunk in value.split(","):
        if ":" not in chunk:
            raise SpecError(
                f"series {label!r}: point {chunk.strip()!r} is not an x : csv-path pair"
            )
        x_text, path_text = (part.strip() for part in chunk.split(":", 1))
        if not x_text or not path_text:
            raise SpecError(f"series {label!r}: point {chunk.strip()!r} has an empty half")
        points.append(Point(x_text, Path(path_text)))
    return tuple(points)


def parse_figure_spec(text: str) -> FigureSpec:
    entries = _parse_flat(text)
    series = []
    for key in sorted(k for k in entries if k.startswith("series_")):
        label = key[len("series_"):]
        if not label:
            raise SpecError("series key with an empty label")
        series.append(Series(label, _parse_points(label, entries.pop(key))))
    if not series:
        raise SpecError("a figure spec needs at least one series_<label> key")

    metrics_text = entries.pop("metrics", ", ".join(DEFAULT_METRICS))
    metrics = tuple(m.strip() for m in metrics_text.split(",") if m.strip())
    unknown = [m for m in metrics if m not in METRIC_COLUMNS]
    if not metrics or unknown:
        raise SpecError(
            f"metrics must be a non-empty subset of {METRIC_COLUMNS}, got {metrics_text!r}"
        )

    image_format = entries.pop("format", "png")
    if image_format not in IMAGE_FORMATS:
        raise SpecError(f"format must be one of {IMAGE_FORMATS}, got {image_format!r}")

    spec = FigureSpec(
        title=entries.pop("title", ""),
        x_label=entries.pop("x", "x"),
        metrics=metrics,
        image_format=image_format,
        stem=entries.pop("stem", "figure"),
        series=tuple(series),
    )
    if entries:
        raise SpecError(f"unknown keys: {sorted(entries)}")
    missing = [
        str(p.path) for s in spec.series for p in s.points if not p.path.is_file()
    ]
    if missing:
        raise SpecError(f"missing input files: {missing}")
    return spec


def load_figure_spec(path) -> FigureSpec:
    return parse_figure_spec(Path(path).read_text())


# ---------------------------------------------------------- aggregation


def aggregate(path, metric: str) -> tuple[float, float]:
    """Mean and sample std of one CSV column; zero spread below two rows."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or metric not in reader.fieldnames:
            raise SpecError(f"{path}: no column {metric!r} (header {reader.fieldnames})")
        try:
            values = [float(row[metric]) for row in reader]
        except (TypeError, ValueError) as exc:
            raise SpecError(f"{path}: non-numeric {metric!r} value: {exc}") from exc
    if not values:
        raise SpecError(f"{path}: no data rows")
    return fmean(values), stdev(values) if len(values) > 1 else 0.0


# ------------------------------------------------------------ rendering


def _numeric_axis(spec: FigureSpec) -> bool:
    try:
        for series in spec.series:
            for point in series.points:
                float(point.x_text)
    except ValueError:
        return False
    return True


def _render_metric(spec: FigureSpec, metric: str, out_path: Path) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    numeric = _numeric_axis(spec)
    ordered = sorted(spec.series, key=lambda s: s.label)
    lines = []
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if numeric:
        for series in ordered:
            points = sorted(series.points, key=lambda p: float(p.x_text))
            xs = [float(p.x_text) for p in points]
            stats = [aggregate(p.path, metric) for p in points]
            means = [m for m, _ in stats]
            stds = [s for _, s in stats]
            ax.plot(xs, means, marker="o", label=series.label)
            ax.fill_between(
                xs,
                [m - s for m, s in zip(means, stds)],
                [m + s for m, s in zip(means, stds)],
                alpha=0.2,
            )
            lines.extend(
                f"{series.label}\t{p.x_text}\t{metric}\tmean={m!r}\tstd={s!r}"
                for p, (m, s) in zip(points, stats)
            )
    else:
        categories = [p.x_text for p in spec.series[0].points]
        width = 0.8 / len(ordered)
        for index, series in enumerate(ordered):
            by_x = {p.x_text: p for p in series.points}
            missing = [c for c in categories if c not in by_x]
            if missing:
                raise SpecError(
                    f"series {series.label!r} lacks categories {missing} present "
                    f"in series {spec.series[0].label!r}"
                )
            stats = [aggregate(by_x[c].path, metric) for c in categories]
            offsets = [
                k + (index - (len(ordered) - 1) / 2) * width
                for k in range(len(categories))
            ]
            ax.bar(
                offsets,
                [m for m, _ in stats],
                width,
                yerr=[s for _, s in stats],
                capsize=3,
                label=series.label,
            )
            lines.extend(
                f"{series.label}\t{c}\t{metric}\tmean={m!r}\tstd={s!r}"
                for c, (m, s) in zip(categories, stats)
            )
        ax.set_xticks(range(len(categories)), categories)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(metric)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return lines


def render_figures(spec: FigureSpec, outdir) -> tuple[list[Path], list[str]]:
    """One image per metric; returns written paths and aggregate lines."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    lines: list[str] = []
    for metric in spec.metrics:
        out_path = outdir / f"{spec.stem}_{metric}.{spec.image_format}"
        lines.extend(_render_metric(spec, metric, out_path))
        written.append(out_path)
    return written, lines
