# pylint: disable=missing-function-docstring, missing-module-docstring
import json

import numpy as np
import pandas as pd
import pytest

from collect_experiment_data import (
    collect_run_records,
    flatten_dict,
    output_path,
    record_path,
    sibling_path,
    with_echo,
    write_jsonl,
    write_record,
    write_table,
)


def test_flatten_dict():
    assert flatten_dict({"a": 1, "b": {"c": 2, "d": {"e": 3}}}) == {"a": 1, "b_c": 2, "b_d_e": 3}


def test_output_path_fixes_suffix_and_creates_folders(tmp_path):
    path = output_path(tmp_path / "deep" / "table", "jsonl")
    assert path == tmp_path / "deep" / "table.jsonl"
    assert path.parent.exists()
    with pytest.raises(ValueError):
        output_path(tmp_path / "t", "xlsx")


def test_sibling_and_record_paths(tmp_path):
    out = tmp_path / "grow.csv"
    assert sibling_path(out, "g3", ".dot") == tmp_path / "grow_g3.dot"
    assert sibling_path(out, "moments") == tmp_path / "grow_moments.csv"
    assert record_path(out) == tmp_path / "grow.record.json"


def test_write_table_formats(tmp_path):
    df = with_echo(pd.DataFrame({"n": [0, 1], "value": [0.5, 1.5]}), {"seed": 3, "g0": "k1"})
    csv_path = write_table(df, tmp_path / "t.csv", "csv")
    assert csv_path.read_text().splitlines()[0] == "n,value,seed,g0"
    assert pd.read_csv(csv_path)["seed"].tolist() == [3, 3]

    jsonl_path = write_table(df, tmp_path / "t", "jsonl")
    lines = jsonl_path.read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[1]) == {"n": 1, "value": 1.5, "seed": 3, "g0": "k1"}


def test_records_and_jsonl_handle_numpy_values(tmp_path):
    record = {"mean": np.float64(0.25), "count": np.int64(4), "hist": np.arange(3)}
    path = write_record(tmp_path / "r.record.json", record)
    assert json.loads(path.read_text()) == {"mean": 0.25, "count": 4, "hist": [0, 1, 2]}

    path = write_jsonl(tmp_path / "x.jsonl", [{"a": np.int64(1)}, {"a": 2}])
    assert [json.loads(line) for line in path.read_text().splitlines()] == [{"a": 1}, {"a": 2}]


def test_collect_run_records(tmp_path):
    write_record(tmp_path / "a.record.json", {"config": {"seed": 1}, "results": {"x": 1}})
    write_record(tmp_path / "b.record.json", {"config": {"seed": 2}, "results": {"y": 2}})
    csv_path = collect_run_records(tmp_path, timestamp=False)
    df = pd.read_csv(csv_path)
    assert csv_path.name == "collected_results.csv"
    assert df["config_seed"].tolist() == [1, 2]
    assert df["record_file"].tolist() == ["a.record.json", "b.record.json"]
    assert set(df.columns) >= {"results_x", "results_y"}
    with pytest.raises(FileNotFoundError):
        collect_run_records(tmp_path / "missing")
