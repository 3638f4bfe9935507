"""Render figure CSVs to publication-style panels.

Strictly read-only over the CSV contract: no numeric computation happens
here beyond axis transforms, so any discrepancy in a rendered curve is
attributable to the data producer.  A sha256 checksum of the consumed CSVs
is embedded in the image metadata for provenance.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import os
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .layouts import (AXIS_LABELS, M_COLORS, SCHEME_STYLES, PanelLayout,
                      PanelSpec, layout_for)


class MissingFileError(FileNotFoundError):
    pass


class MissingColumnError(KeyError):
    pass


@dataclass
class SeriesSummary:
    label: str
    style: str
    color: str
    n_points: int
    n_gaps: int


@dataclass
class PanelSummary:
    name: str
    xlabel: str
    ylabel: str
    series: list[SeriesSummary] = field(default_factory=list)

    @property
    def n_series(self) -> int:
        return len(self.series)


def _read_rows(path: str, needed: tuple[str, ...]) -> list[dict]:
    if not os.path.exists(path):
        raise MissingFileError(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [c for c in needed if c not in cols]
        if missing:
            raise MissingColumnError(f"{path} lacks columns {missing}")
        return list(reader)


def _fnum(text: str) -> float:
    return float("nan") if text == "NaN" else float(text)


def _series_label(key: dict, y_col: str, multi_y: bool) -> str:
    parts = []
    if "scheme" in key:
        m = int(key.get("m", "0"))
        parts.append("original" if m == 0
                     else f"scheme {key['scheme'].upper()} m={m}")
    if "detector" in key and "scheme" not in key:
        parts.append(key["detector"])
    elif "detector" in key:
        parts.append(key["detector"])
    if multi_y:
        parts.append(y_col)
    return ", ".join(parts) if parts else y_col


def _series_style(key: dict, y_col: str) -> tuple[str, str]:
    style = SCHEME_STYLES.get(key.get("scheme", "a"), "-")
    if "m" in key:
        color = M_COLORS[int(key["m"]) % len(M_COLORS)]
    else:
        color = "tab:blue" if y_col == "sigma" else "tab:red"
        if key.get("detector") == "homodyne":
            style = "--"
    return style, color


def _render_panel(ax, panel: PanelSpec, rows: list[dict]) -> PanelSummary:
    axis = rows[0]["axis"] if rows else "value"
    summary = PanelSummary(panel.csv_name, AXIS_LABELS.get(axis, axis),
                           panel.ylabel)
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple((k, row[k]) for k in panel.group_keys)
        groups.setdefault(key, []).append(row)

    multi_y = len(panel.y_columns) > 1
    for key_items, grp in sorted(groups.items()):
        key = dict(key_items)
        xs = np.array([_fnum(r["value"]) for r in grp])
        order = np.argsort(xs)
        for y_col in panel.y_columns:
            ys = np.array([_fnum(r[y_col]) for r in grp])[order]
            style, color = _series_style(key, y_col)
            label = _series_label(key, y_col, multi_y)
            ax.plot(xs[order], ys, style, color=color, label=label, lw=1.4)
            summary.series.append(SeriesSummary(
                label, style, color, int(np.sum(np.isfinite(ys))),
                int(np.sum(~np.isfinite(ys)))))

    for limit in panel.limit_columns:
        # the limits depend only on the axis value, not on the series
        seen: dict[float, float] = {}
        for r in rows:
            seen[_fnum(r["value"])] = _fnum(r[limit])
        xs = np.array(sorted(seen))
        ys = np.array([seen[x] for x in xs])
        style = ":" if limit == "sql" else "-."
        ax.plot(xs, ys, style, color="gray", label=limit.upper(), lw=1.2)
        summary.series.append(SeriesSummary(limit.upper(), style, "gray",
                                            int(np.sum(np.isfinite(ys))), 0))

    ax.set_xlabel(summary.xlabel)
    ax.set_ylabel(summary.ylabel)
    if panel.title:
        ax.set_title(panel.title)
    if panel.logy:
        ax.set_yscale("log")
    ax.legend(fontsize=7)
    return summary


def render(figure_id: str, input_dir: str, output_dir: str,
           fmt: str = "png") -> tuple[str, list[PanelSummary]]:
    """Render one figure; returns (image path, per-panel layout summary)."""
    if fmt not in ("png", "svg"):
        raise ValueError("format must be png or svg")
    layout = layout_for(figure_id)
    os.makedirs(output_dir, exist_ok=True)

    needed = ("axis", "value", "scheme", "m", "detector", "status")
    digest = hashlib.sha256()
    panel_rows = []
    for panel in layout.panels:
        path = os.path.join(input_dir, panel.csv_name + ".csv")
        rows = _read_rows(path, needed + panel.y_columns + panel.limit_columns)
        with open(path, "rb") as fh:
            digest.update(fh.read())
        panel_rows.append(rows)

    n = len(layout.panels)
    ncols = min(layout.ncols, n)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.2 * ncols, 3.9 * nrows),
                             squeeze=False)
    summaries = []
    for i, (panel, rows) in enumerate(zip(layout.panels, panel_rows)):
        ax = axes[i // ncols][i % ncols]
        summary = _render_panel(ax, panel, rows)
        summary.name = panel.csv_name
        summaries.append(summary)
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()

    out_path = os.path.join(output_dir, f"{layout.figure_id.lower()}.{fmt}")
    fig.savefig(out_path,
                metadata={"Source": f"sha256:{digest.hexdigest()}"})
    plt.close(fig)
    return out_path, summaries


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pamzi-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from its CSVs")
    p.add_argument("--figure", required=True)
    p.add_argument("--in", dest="input_dir", required=True)
    p.add_argument("--out", dest="output_dir", required=True)
    p.add_argument("--format", choices=["png", "svg"], default="png")
    args = parser.parse_args(argv)
    try:
        path, summaries = render(args.figure, args.input_dir,
                                 args.output_dir, args.format)
    except (MissingFileError, MissingColumnError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    for s in summaries:
        print(f"  {s.name}: {s.n_series} series, x={s.xlabel!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
