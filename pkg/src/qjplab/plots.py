"""Figures for report bundles: PNG files via matplotlib plus a gnuplot script per figure.

The CSV tables stay the source of truth; the gnuplot scripts read them directly.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import PlotSpec, ReportBundle  # noqa: E402

STYLE = {"lines": "-", "points": "o", "linespoints": "o-"}


def _series_data(bundle: ReportBundle, series):
    table = bundle.table(series.table)
    if series.quantity is None:
        x = np.array(table.column(series.x), dtype=float)
        y = np.array(table.column(series.y), dtype=float)
        return x, y
    return table.select(series.quantity, series.x, series.y)


def render_png(bundle: ReportBundle, spec: PlotSpec, path: Path):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if spec.heatmap:
        table = bundle.table(spec.heatmap)
        x = np.array(table.column("x"), dtype=float)
        p = np.array(table.column("p"), dtype=float)
        v = np.array(table.column("value"), dtype=float)
        xs, ps = np.unique(x), np.unique(p)
        grid = v.reshape(len(xs), len(ps))
        mesh = ax.pcolormesh(xs, ps, grid.T, shading="auto", cmap="RdBu_r", vmin=-abs(v).max(), vmax=abs(v).max())
        fig.colorbar(mesh, ax=ax, label="W(x, p)")
    else:
        for series in spec.series:
            x, y = _series_data(bundle, series)
            fmt = STYLE.get(series.style, "-")
            if spec.logy:
                y = np.abs(y)
            ax.plot(x, y, fmt, label=series.label, markersize=4, fillstyle="none")
        if spec.logy:
            ax.set_yscale("log")
        ax.legend(frameon=False, fontsize=8)
        ax.grid(alpha=0.3)
    ax.set_title(spec.title)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def gnuplot_script(bundle: ReportBundle, spec: PlotSpec) -> str:
    lines = [
        "set datafile separator ','",
        "set terminal pngcairo size 720,500",
        f"set output '{spec.stem}_gnuplot.png'",
        f"set title '{spec.title}'",
        f"set xlabel '{spec.xlabel}'",
        f"set ylabel '{spec.ylabel}'",
        "set key top left",
    ]
    if spec.heatmap:
        lines += [
            "set view map",
            "set pm3d map",
            f"splot '{spec.heatmap}.csv' every ::1 using 1:2:3 with pm3d notitle",
        ]
        return "\n".join(lines) + "\n"
    if spec.logy:
        lines.append("set logscale y")
    parts = []
    for series in spec.series:
        table = bundle.table(series.table)
        xi = table.header.index(series.x) + 1
        yi = table.header.index(series.y) + 1
        if series.quantity is None:
            using = f"{xi}:{yi}"
        else:
            qi = table.header.index("quantity") + 1
            using = f'{xi}:(strcol({qi}) eq "{series.quantity}" ? ${yi} : 1/0)'
        style = {"points": "points", "linespoints": "linespoints"}.get(series.style, "lines")
        parts.append(f"'{series.table}.csv' every ::1 using {using} with {style} title '{series.label}'")
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def write_plots(bundle: ReportBundle, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in bundle.plots:
        png = out / f"{spec.stem}.png"
        render_png(bundle, spec, png)
        gp = out / f"{spec.stem}.gp"
        gp.write_text(gnuplot_script(bundle, spec), encoding="utf-8")
        written += [png, gp]
    return written
