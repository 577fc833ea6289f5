"""Report figures written next to the delimited tables."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..inference import FlaggedResult  # noqa: E402
from .geo import Color, node_color  # noqa: E402

PR6_LABELS = ("bottom-50%", "top-50%", "top-25%", "top-10%", "top-5%", "top-1%")
_COLORS = {Color.GREEN: "#2a9d4b", Color.RED: "#c8322d", Color.GRAY: "#8c8c8c"}

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "i3kit",
}


def _save(fig, path):
    fig.tight_layout()
    # no timestamps or version strings, so reruns give identical files
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else {"Date": None})
    plt.close(fig)


def plot_shares(flagged: Sequence[FlaggedResult], n_total: int, path, top_k: int = 20):
    """Horizontal bars of %I3 against %publications, coloured by the I3 flag."""
    rows = sorted(flagged, key=lambda f: (-f.result.i3_exact, f.unit_id))[: top_k or None]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.5, 0.32 * len(rows) + 1.2))
        y = np.arange(len(rows))[::-1]
        i3_pct = [100 * f.result.i3_share for f in rows]
        pub_pct = [100 * f.result.n_papers / n_total for f in rows]
        colors = [_COLORS[node_color(f.i3_test.flag)] for f in rows]
        ax.barh(y, i3_pct, height=0.6, color=colors, label="% I3")
        ax.scatter(pub_pct, y, marker="|", s=120, color="black", zorder=3, label="% papers")
        ax.set_yticks(y, [f"{f.unit_id} {f.i3_test.flag}".strip() for f in rows])
        ax.set_xlabel("percentage of reference set")
        ax.legend(loc="lower right", frameon=False)
        _save(fig, path)
    return path


def plot_pr6_profile(class_counts: Mapping[str, Sequence[float]], path):
    """Grouped bars of papers per PR6 class for a handful of units."""
    units = list(class_counts)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.5, 3.2))
        width = 0.8 / max(len(units), 1)
        x = np.arange(len(PR6_LABELS))
        for i, unit in enumerate(units):
            ax.bar(x + i * width - 0.4 + width / 2, class_counts[unit], width=width, label=unit)
        ax.set_xticks(x, PR6_LABELS)
        ax.set_ylabel("papers")
        ax.legend(frameon=False, fontsize=7)
        _save(fig, path)
    return path
