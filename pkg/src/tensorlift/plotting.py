"""Figures for pipeline reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def stage_totals(reports) -> list:
    """[(stage, total ops)] starting from the input, one entry per pass run."""
    order, before, after = [], {}, {}
    for r in reports:
        if r.name not in after:
            order.append(r.name)
            after[r.name] = 0
        after[r.name] += r.ops_after
    for r in reports:
        if r.name == order[0]:
            before[r.function] = r.ops_before
    if not order:
        return []
    return [("input", sum(before.values()))] + [(name, after[name]) for name in order]


def plot_pass_counts(reports, path: str, title: str = "operation count per stage") -> None:
    totals = stage_totals(reports)
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    names = [n for n, _ in totals]
    values = [v for _, v in totals]
    bars = ax.bar(range(len(values)), values, color="0.45", edgecolor="black", linewidth=0.6)
    for rect, v in zip(bars, values):
        ax.annotate(str(v), (rect.get_x() + rect.get_width() / 2, rect.get_height()),
                    ha="center", va="bottom", fontsize=7, xytext=(0, 2),
                    textcoords="offset points")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=35, ha="right", fontsize=8)
    ax.set_ylabel("ops (all functions)")
    ax.set_title(title, fontsize=10)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
