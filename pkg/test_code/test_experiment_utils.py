# pylint: disable=missing-function-docstring, missing-module-docstring
import os
import time

import pytest

from experiment_utils import (
    find_recent_file,
    format_path,
    generate_permutations,
    map_replicates,
    timer,
)


def test_timer():
    assert timer(3725) == "01:02:05"
    assert timer(0.4) == "00:00:00"


def test_generate_permutations():
    grid = generate_permutations({"alpha": [0.0, 0.5], "gamma": [0.2, 0.8]})
    assert grid == [
        {"alpha": 0.0, "gamma": 0.2},
        {"alpha": 0.0, "gamma": 0.8},
        {"alpha": 0.5, "gamma": 0.2},
        {"alpha": 0.5, "gamma": 0.8},
    ]


def test_format_path(tmp_path, monkeypatch):
    (tmp_path / "a.yaml").write_text("seed: 1\n")
    monkeypatch.chdir(tmp_path)
    assert format_path("a.yaml") == tmp_path / "a.yaml"
    assert format_path(None) is None
    # files next to the modules resolve from any working directory
    assert format_path("config.yaml").name == "config.yaml"
    with pytest.raises(FileNotFoundError):
        format_path("missing.yaml")


def test_find_recent_file(tmp_path):
    assert find_recent_file(tmp_path / "nope", "x") == -1
    assert find_recent_file(tmp_path, "x") == -1
    old = tmp_path / "x_old.csv"
    new = tmp_path / "x_new.csv"
    old.write_text("a")
    new.write_text("b")
    now = time.time()
    os.utime(old, (now - 100, now - 100))
    os.utime(new, (now, now))
    assert find_recent_file(tmp_path, "x") == new


def test_map_replicates_keeps_order():
    items = list(range(-20, 20))
    assert map_replicates(abs, items) == [abs(i) for i in items]
    assert map_replicates(abs, items, workers=3) == [abs(i) for i in items]
    assert map_replicates(abs, []) == []
    with pytest.raises(ValueError):
        map_replicates(abs, items, workers=0)
