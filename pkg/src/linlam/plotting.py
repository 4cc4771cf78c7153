"""PNG figures for the stats subcommand.  CSV stays the primary output; these are views of it."""

from __future__ import annotations

import math
from pathlib import Path

GOLDEN = (math.sqrt(5) - 1.0) / 2.0
FIG_WIDTH = 3.4  # single column, inches

PARAMS = {
    "axes.labelsize": 9,
    "axes.linewidth": 0.6,
    "font.family": "serif",
    "font.size": 8,
    "mathtext.fontset": "stix",
    "legend.fontsize": 7,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (FIG_WIDTH, FIG_WIDTH * GOLDEN),
    "figure.dpi": 200,
    "savefig.dpi": 200,
    "savefig.bbox": "tight",
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
}


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def density_figure(tables, path, label: str = "k"):
    """One curve per size n: P(X = k) against k, darker for larger n."""
    plt = _pyplot()
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        cmap = plt.get_cmap("viridis")
        count = max(len(tables) - 1, 1)
        for i, d in enumerate(tables):
            ks = sorted(d.counts)
            ps = [float(d.probability(k)) for k in ks]
            ax.plot(ks, ps, color=cmap(i / count), marker="o" if len(tables) <= 4 else None,
                    label=f"n={d.n}" if len(tables) <= 6 else None)
        ax.set_xlabel(f"${label}$")
        ax.set_ylabel(f"$P(X_n = {label})$")
        if len(tables) <= 6:
            ax.legend()
        elif tables:
            sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(tables[0].n, tables[-1].n))
            fig.colorbar(sm, ax=ax, label="$n$")
        fig.savefig(Path(path), format="png", metadata={"Software": None})
        plt.close(fig)
    return Path(path)


def trend_figure(report, path):
    """Each numeric series of a trend report against n."""
    plt = _pyplot()
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        for name, rows in sorted(report.series.items()):
            for label, pts in _curves(name, rows):
                xs, ys = zip(*pts)
                ax.plot(xs, ys, label=label)
        ax.set_xlabel("$n$")
        ax.set_title(report.target, fontsize=8)
        ax.legend()
        fig.savefig(Path(path), format="png", metadata={"Software": None})
        plt.close(fig)
    return Path(path)


def _curves(name: str, rows: dict):
    """Split a series {n: value} into plottable curves; dict values give one curve per key."""
    curves: dict = {}
    for n, val in sorted(rows.items()):
        items = val.items() if isinstance(val, dict) else [(None, val)]
        for key, y in items:
            if isinstance(y, (tuple, list)):
                y = y[0]
            if isinstance(y, (int, float)) and math.isfinite(y):
                curves.setdefault(name if key is None else f"{name}:{key}", []).append((n, float(y)))
    return sorted(curves.items())
