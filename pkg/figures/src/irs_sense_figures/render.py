"""Render sweep CSVs into static figures.

A figure spec is a JSON object:

    {
      "input": "sweep.csv",          table to plot
      "output": "figure.png",        image to write
      "x": "value",                  column for the x axis
      "y": [{"column": "success_rate_dsp", "label": "DSP detector"},
            {"column": "success_rate_rss", "label": "RSS detector"}],
      "title": "...",                optional
      "x_label": "...",              optional, defaults to the x column
      "y_label": "...",              optional
      "x_log": false, "y_log": false optional axis scales
    }

One curve is drawn per y entry with the given legend label. When a column
named "<y column>_stderr" exists, symmetric error bars are drawn. The
scripts know only this CSV schema, nothing about the simulator that
produced the file.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


class FigureError(ValueError):
    """Spec or data problem; nothing is written."""


@dataclass(frozen=True)
class SeriesSpec:
    column: str
    label: str


@dataclass(frozen=True)
class FigureSpec:
    input: str
    output: str
    x: str
    y: tuple[SeriesSpec, ...]
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    x_log: bool = False
    y_log: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "FigureSpec":
        missing = {"input", "output", "x", "y"} - set(data)
        if missing:
            raise FigureError(f"figure spec lacks keys: {sorted(missing)}")
        series = []
        for entry in data["y"]:
            if isinstance(entry, str):
                series.append(SeriesSpec(entry, entry))
            else:
                series.append(SeriesSpec(entry["column"],
                                         entry.get("label", entry["column"])))
        if not series:
            raise FigureError("figure spec has no y series")
        return cls(data["input"], data["output"], data["x"], tuple(series),
                   data.get("title", ""), data.get("x_label", ""),
                   data.get("y_label", ""), bool(data.get("x_log", False)),
                   bool(data.get("y_log", False)))

    @classmethod
    def from_json(cls, path: str) -> "FigureSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _read_table(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FigureError(f"{path}: no data rows")
    return rows


def _column(rows: list[dict], name: str, path: str) -> list[float]:
    if name not in rows[0]:
        raise FigureError(f"{path}: column {name!r} not in header "
                          f"{sorted(rows[0])}")
    return [float(r[name]) for r in rows]


def render(spec: FigureSpec) -> str:
    """Draw the figure and write the output image; returns the output path."""
    rows = _read_table(spec.input)
    xs = _column(rows, spec.x, spec.input)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for series in spec.y:
        ys = _column(rows, series.column, spec.input)
        err_col = f"{series.column}_stderr"
        if err_col in rows[0]:
            errs = [float(r[err_col]) for r in rows]
            ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3,
                        label=series.label)
        else:
            ax.plot(xs, ys, marker="o", label=series.label)
    if spec.x_log:
        ax.set_xscale("log")
    if spec.y_log:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label or spec.x)
    if spec.y_label:
        ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(spec.output, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return spec.output


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: render_figures <spec.json>", file=sys.stderr)
        return 2
    try:
        out = render(FigureSpec.from_json(argv[0]))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
