"""Plots of the tables written by run.py."""

# pylint: disable=invalid-name, too-many-locals
from pathlib import Path

import matplotlib.pyplot as plt
from matplotlib.lines import Line2D
import numpy as np
import pandas as pd

from experiment_utils import find_recent_file
from reprograph import degree_histogram, read_edgelist

REGIME_COLORS = {
    "subcritical": "tab:blue",
    "critical": "tab:orange",
    "supercritical": "tab:red",
}


def latest_table(folder, prefix, cols=None) -> pd.DataFrame:
    """Read the most recent csv in ``folder`` whose name starts with ``prefix``."""
    csv_file = find_recent_file(folder, prefix=prefix)
    if csv_file == -1:
        raise FileNotFoundError(f"No file starting with {prefix!r} in {folder}.")
    return pd.read_csv(csv_file, usecols=cols)


def _save(fig, save):
    if save:
        save_path = Path(save)
        if not save_path.is_absolute() and save_path.parent == Path("."):
            parent = Path.cwd() / "plots"
            parent.mkdir(exist_ok=True)
            save_path = parent / save_path
        fig.savefig(save_path)
        return save_path
    return None


def plot_degree_distribution(csv, save=None, snapshot=None, show=False):
    """
    Log-log plot of the stationary degree distribution written by
    ``run.py chain --stationary``, with the empirical degree histogram of a
    grown graph on top when ``snapshot`` (an ``.edges`` file) is given.

    :param csv: stationary table with columns x and probability.
    :param save: file name; bare names go to ./plots.
    :param snapshot: edge-list file of a grown graph.
    :return: the figure.
    """
    df = pd.read_csv(csv, usecols=["x", "probability", "p_star"])
    positive = df[(df["x"] > 0) & (df["probability"] > 0)]

    fig, ax = plt.subplots()
    fig.set_size_inches(7, 5)
    ax.loglog(positive["x"], positive["probability"], "o-", markersize=3, label="stationary")

    if snapshot is not None:
        g = read_edgelist(snapshot)
        hist = degree_histogram(g)
        degrees = np.array([d for d in sorted(hist) if d > 0])
        if degrees.size:
            freq = np.array([hist[d] for d in degrees]) / g.num_vertices
            ax.loglog(degrees, freq, "x", label=f"G with {g.num_vertices} vertices")

    p_star = float(df["p_star"].iloc[0])
    title = "Degree distribution"
    if np.isfinite(p_star):
        title += f" (tail exponent p* = {p_star:.3f})"
    ax.set_title(title)
    ax.set_xlabel("degree")
    ax.set_ylabel("probability")
    ax.legend(prop={"size": 8})

    _save(fig, save)
    if show:
        plt.show()
    return fig


def plot_phase_diagram(csv, save=None, show=False):
    """
    The alpha-gamma plane of a ``run.py phase`` table: grid points colored by
    degree chain regime, with the curves (1+gamma)(alpha+gamma) = 1,
    2 gamma + alpha = 1 and the level set p* = 2.

    :param csv: phase table.
    :param save: file name; bare names go to ./plots.
    :return: the figure.
    """
    df = pd.read_csv(csv)

    fig, ax = plt.subplots()
    fig.set_size_inches(6, 6)
    for regime, grp in df.groupby("degree_regime"):
        ax.scatter(
            grp["grid_alpha"], grp["grid_gamma"], color=REGIME_COLORS.get(regime, "gray"),
            label=regime, zorder=3,
        )

    alpha, gamma = np.meshgrid(np.linspace(0, 1, 201), np.linspace(0, 1, 201))
    curves = [
        ((1 + gamma) * (alpha + gamma), "k", "(1+γ)(α+γ) = 1"),
        (2 * gamma + alpha, "tab:green", "2γ+α = 1"),
        (((1 + gamma) ** 2 + (alpha + gamma) ** 2) / 2, "tab:purple", "p* = 2"),
    ]
    handles = []
    for level, color, label in curves:
        ax.contour(alpha, gamma, level, levels=[1.0], colors=color)
        handles.append(Line2D([0], [0], color=color, label=label))

    points, labels = ax.get_legend_handles_labels()
    ax.legend(handles=points + handles, labels=labels + [h.get_label() for h in handles],
              prop={"size": 8})
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("alpha")
    ax.set_ylabel("gamma")
    ax.set_title(f"Regimes at beta = {df['beta'].iloc[0]}" if "beta" in df else "Regimes")

    _save(fig, save)
    if show:
        plt.show()
    return fig


if __name__ == '__main__':
    results = Path.cwd() / "results"
    plot_phase_diagram(results / "phase.csv", save="phase.png", show=True)
    plot_degree_distribution(results / "chain.csv", save="degree.png", show=True)
