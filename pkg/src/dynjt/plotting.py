"""Figures for benchmark reports."""

from __future__ import annotations

import os
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import FuncFormatter  # noqa: E402

from .harness import SetReport  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "dynjt",
}


def _labels(reports: Sequence[SetReport]) -> List[str]:
    return [f"n={r.nodes}\nw={r.width}" for r in reports]


def saving_figure(reports: Sequence[SetReport], path: str, title: str = "") -> str:
    """Average and maximum saving factor per set, log scale."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        x = range(len(reports))
        ax.bar([i - 0.2 for i in x], [r.avg_saving for r in reports], width=0.4, label="average")
        ax.bar([i + 0.2 for i in x], [r.max_saving for r in reports], width=0.4, label="maximum")
        ax.axhline(1.0, color="0.4", lw=0.8, ls="--")
        ax.set_yscale("log")
        plain = FuncFormatter(lambda v, _: f"{v:g}")
        ax.yaxis.set_major_formatter(plain)
        ax.yaxis.set_minor_formatter(plain)
        ax.set_xticks(list(x), _labels(reports))
        ax.set_ylabel("saving factor (static / dynamic ops)")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def separator_figure(reports: Sequence[SetReport], path: str, title: str = "") -> str:
    """Average maximal separator size, dynamic against static."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        x = list(range(len(reports)))
        ax.plot(x, [r.avg_max_sep_static for r in reports], "o-", label="static")
        ax.plot(x, [r.avg_max_sep_dynamic for r in reports], "s-", label="dynamic")
        ax.set_xticks(x, _labels(reports))
        ax.set_ylabel("average maximal separator (variables)")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def write_report_figures(reports: Sequence[SetReport], csv_path: str, experiment: int) -> List[str]:
    """Render both figures next to ``csv_path``; returns the written paths."""
    stem, _ = os.path.splitext(csv_path)
    title = f"experiment {experiment}"
    return [
        saving_figure(reports, f"{stem}_saving.png", title),
        separator_figure(reports, f"{stem}_separators.png", title),
    ]
