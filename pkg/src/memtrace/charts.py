"""Render structure-splitting charts to image files.

One bar chart per live type: field access weights on the y axis, hot
fields in black, cold fields in gray, mirroring the delimited report the
chart data came from.
"""

from __future__ import annotations

import re
from pathlib import Path

HOT_COLOR = "black"
COLD_COLOR = "0.6"


def render_split_charts(charts: list[dict], outdir, fmt: str = "png") -> list[Path]:
    """Write one figure per chart entry; returns the created paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for chart in charts:
        fields = chart["fields"]
        names = [f["field"] for f in fields]
        weights = [f["weight"] for f in fields]
        colors = [HOT_COLOR if f["hot"] else COLD_COLOR for f in fields]

        fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(fields) + 2), 3.2))
        ax.bar(range(len(fields)), weights, color=colors)
        ax.set_xticks(range(len(fields)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        ax.set_ylabel("accesses")
        ax.set_title(f"{chart['type']}: hot (black) vs cold (gray) fields")
        fig.tight_layout()

        safe = re.sub(r"[^A-Za-z0-9_.-]", "_", chart["type"])
        path = outdir / f"split_{safe}.{fmt}"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths
