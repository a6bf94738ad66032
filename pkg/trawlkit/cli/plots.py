# trawlkit/cli/plots.py
#
# Optional SVG line charts written by the CLI with matplotlib's Agg backend.
# Plots are a convenience; nothing reads them back.

import logging
from pathlib import Path
from typing import Dict, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

logger = logging.getLogger(__name__)

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.figsize": (6.0, 3.5),
    "svg.hashsalt": "trawlkit",
    "svg.fonttype": "none",
}


def line_chart(
    path: Path,
    x: Sequence[float],
    series: Dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: Optional[str] = None,
    markers: bool = False,
) -> Path:
    """One line per entry of ``series`` sharing the x values."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, values in series.items():
            ax.plot(x, values, marker="o" if markers else None, markersize=2.5,
                    linewidth=1.0, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info("wrote %s", path)
    return path
