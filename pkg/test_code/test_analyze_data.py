# pylint: disable=missing-function-docstring, missing-module-docstring, wrong-import-position
import matplotlib

matplotlib.use("Agg")

import pandas as pd
import pytest

from analyze_data import latest_table, plot_degree_distribution, plot_phase_diagram
from run import EXIT_OK, main


def test_phase_diagram(tmp_path):
    out = tmp_path / "phase.csv"
    assert main(["phase", "--grid-alpha", "0,0.5,1", "--grid-gamma", "0,0.4,0.8",
                 "--out", str(out), "--quiet"]) == EXIT_OK
    fig = plot_phase_diagram(out, save=tmp_path / "phase.png")
    assert (tmp_path / "phase.png").exists()
    labels = fig.axes[0].get_legend_handles_labels()[1]
    assert {"subcritical", "supercritical"} <= set(labels)


def test_degree_distribution_with_snapshot(tmp_path):
    chain = tmp_path / "chain.csv"
    grow = tmp_path / "grow.csv"
    assert main(["chain", "--gamma", "0.2", "--stationary", "--out", str(chain), "--quiet"]) == EXIT_OK
    assert main(["grow", "--steps", "8", "--snapshot", "8", "--out", str(grow), "--quiet"]) == EXIT_OK
    fig = plot_degree_distribution(chain, save=tmp_path / "degree.png", snapshot=tmp_path / "grow_g8.edges")
    assert (tmp_path / "degree.png").exists()
    assert len(fig.axes[0].get_lines()) == 2
    assert "p* =" in fig.axes[0].get_title()


def test_bare_save_names_go_to_plots_folder(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "phase.csv"
    assert main(["phase", "--out", str(out), "--quiet"]) == EXIT_OK
    plot_phase_diagram(out, save="regimes.png")
    assert (tmp_path / "plots" / "regimes.png").exists()


def test_latest_table(tmp_path):
    pd.DataFrame({"a": [1, 2]}).to_csv(tmp_path / "phase.csv", index=False)
    assert latest_table(tmp_path, "phase.csv")["a"].tolist() == [1, 2]
    with pytest.raises(FileNotFoundError):
        latest_table(tmp_path, "chain")
