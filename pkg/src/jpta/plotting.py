"""SVG figures for eval and sysim tables.

Figures are drawn on a bare ``Figure`` with the SVG canvas (no pyplot
state), under fixed rc settings so the same input gives the same bytes.
"""

from __future__ import annotations

import io
from collections import defaultdict
from typing import Mapping, Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.collections import PatchCollection
from matplotlib.figure import Figure
from matplotlib.patches import Patch, Rectangle

STYLE = {
    "svg.hashsalt": "jpta",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "path.simplify": False,
}
FIG_SIZE = (6.4, 3.6)
COLORS = {"ao": "#4c72b0", "3d": "#dd8452"}
HATCH = {"gain_mean": "", "gain_p05": "//"}

GAIN_BAR_COLUMNS = ("n_pool", "n_max", "mode", "gain_mean", "gain_p05")
LOSS_CDF_COLUMNS = ("effective_loss_db",)


def _render(fig: Figure) -> str:
    buf = io.StringIO()
    FigureCanvasSVG(fig).print_svg(buf, metadata={"Date": None, "Creator": None})
    return buf.getvalue()


def gain_bars_svg(rows: Sequence[Mapping[str, str]]) -> str:
    """Grouped bars of JPTA gains, one group per (n_pool, n_max) cell.

    Each group holds the seed-averaged ``gain_mean`` and ``gain_p05`` of
    every non-baseline mode and is emitted as one SVG element with id
    ``bargroup-<i>``.
    """
    sums: dict[tuple, list[float]] = defaultdict(lambda: [0.0, 0.0, 0])
    for r in rows:
        if r["mode"] == "baseline":
            continue
        key = (int(r["n_pool"]), int(r["n_max"]), r["mode"])
        acc = sums[key]
        acc[0] += float(r["gain_mean"])
        acc[1] += float(r["gain_p05"])
        acc[2] += 1
    cells = sorted({(p, n) for p, n, _ in sums})
    modes = sorted({m for _, _, m in sums}, key=lambda m: (m not in COLORS, m))
    if not cells:
        raise ValueError("no JPTA rows to plot")

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=FIG_SIZE)
        ax = fig.add_subplot()
        n_bars = 2 * len(modes)
        width = 0.8 / n_bars
        for gi, (pool, nmax) in enumerate(cells):
            patches, faces, hatches = [], [], []
            j = 0
            for metric_i, metric in enumerate(("gain_mean", "gain_p05")):
                for mode in modes:
                    acc = sums.get((pool, nmax, mode))
                    value = 100.0 * acc[metric_i] / acc[2] if acc else 0.0
                    x0 = gi - 0.4 + j * width
                    patches.append(Rectangle((x0, min(value, 0.0)), width, abs(value)))
                    faces.append(COLORS.get(mode, "0.5"))
                    hatches.append(HATCH[metric])
                    j += 1
            coll = PatchCollection(patches, facecolors=faces, edgecolors="black", linewidths=0.4)
            coll.set_gid(f"bargroup-{gi}")
            ax.add_collection(coll)
            hatched = [
                Rectangle(p.get_xy(), p.get_width(), p.get_height())
                for p, h in zip(patches, hatches) if h
            ]
            overlay = PatchCollection(hatched, facecolors="none", edgecolors="black",
                                      linewidths=0.0, hatch=HATCH["gain_p05"])
            overlay.set_gid(f"hatch-{gi}")
            ax.add_collection(overlay)
        ax.set_xlim(-0.6, len(cells) - 0.4)
        ax.autoscale(axis="y")
        ax.axhline(0.0, color="black", linewidth=0.6)
        ax.set_xticks(np.arange(len(cells)))
        ax.set_xticklabels([f"{p}, {n}" for p, n in cells])
        ax.set_xlabel("n_pool, n_max")
        ax.set_ylabel("gain_mean (solid) / gain_p05 (hatched) [%]")
        handles = [Patch(facecolor=COLORS.get(m, "0.5"), edgecolor="black", label=m) for m in modes]
        handles.append(Patch(facecolor="white", edgecolor="black", label="gain_mean"))
        handles.append(Patch(facecolor="white", edgecolor="black", hatch="//", label="gain_p05"))
        ax.legend(handles=handles, loc="best")
        fig.tight_layout()
        return _render(fig)


def loss_cdf_svg(rows: Sequence[Mapping[str, str]]) -> str:
    """Empirical CDF of per-sample losses, one curve per (arch, n_beams, algorithm)."""
    series: dict[str, list[float]] = defaultdict(list)
    for r in rows:
        label = ", ".join(r[c] for c in ("arch", "n_beams", "algorithm") if c in r) or "samples"
        series[label].append(float(r["effective_loss_db"]))

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=FIG_SIZE)
        ax = fig.add_subplot()
        for label in sorted(series):
            x = np.sort(np.array(series[label]))
            y = np.arange(1, x.size + 1) / x.size
            ax.step(x, y, where="post", label=label, linewidth=1.0)
        ax.set_xlabel("effective_loss_db")
        ax.set_ylabel("CDF")
        ax.set_ylim(0.0, 1.0)
        ax.legend(loc="lower right")
        fig.tight_layout()
        return _render(fig)
