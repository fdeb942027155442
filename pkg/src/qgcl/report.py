"""Figure rendering for CLI reports (walk distributions, law residuals).

matplotlib is imported lazily so the library and tests stay import-light
when no figures are requested.
"""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def walk_distribution_figure(dist, path, title: str = "") -> None:
    """Bar chart of a position distribution, written to ``path``."""
    plt = _pyplot()
    labels = [str(pos) for pos, _ in dist]
    probs = [p for _, p in dist]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(dist)), 3.0))
    ax.bar(range(len(dist)), probs, color="#3b6ea5")
    ax.set_xticks(range(len(dist)))
    ax.set_xticklabels(labels, rotation=90 if len(dist) > 16 else 0, fontsize=8)
    ax.set_xlabel("position")
    ax.set_ylabel("probability")
    if title:
        ax.set_title(title)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def law_residual_figure(results, path) -> None:
    """Per-instance law residuals on a log scale, one bar group per law."""
    plt = _pyplot()
    labels = [f"{r.law_id}\n{r.description.split(':')[0]}" for r in results]
    residuals = [max(r.residual, 1e-18) for r in results]
    colors = ["#3b6ea5" if r.passed else "#b5443b" for r in results]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.28 * len(results)), 3.4))
    ax.bar(range(len(results)), residuals, color=colors)
    ax.set_yscale("log")
    ax.axhline(1e-10, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xticks(range(len(results)))
    ax.set_xticklabels(labels, rotation=90, fontsize=5)
    ax.set_ylabel("channel residual")
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
