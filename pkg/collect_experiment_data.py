"""Write result tables and run records, and gather run records into one csv."""

# pylint: disable=unspecified-encoding
from collections.abc import MutableMapping
from pathlib import Path
import csv
import datetime
import json
import logging

import numpy as np
import pandas as pd

logger = logging.getLogger("utils")

FORMATS = ("csv", "jsonl")
RECORD_SUFFIX = ".record.json"


def flatten_dict(d, parent_key='', sep='_'):
    items = []
    for k, v in d.items():
        new_key = parent_key + sep + k if parent_key else k
        if isinstance(v, MutableMapping):
            items.extend(flatten_dict(v, new_key, sep=sep).items())
        else:
            items.append((new_key, v))
    return dict(items)


def output_path(out, fmt: str) -> Path:
    """``out`` with the suffix of ``fmt``; parent folders are created."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown output format {fmt!r}, expected one of {FORMATS}.")
    path = Path(out)
    if path.suffix != f".{fmt}":
        path = path.with_suffix(f".{fmt}")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def sibling_path(path, tag: str, suffix: str = None) -> Path:
    """``<stem>_<tag><suffix>`` next to ``path``."""
    path = Path(path)
    return path.with_name(f"{path.stem}_{tag}{suffix if suffix is not None else path.suffix}")


def record_path(path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}{RECORD_SUFFIX}")


def with_echo(df: pd.DataFrame, echo: dict) -> pd.DataFrame:
    """Append constant config echo columns to every row."""
    df = df.copy()
    for key, value in echo.items():
        df[key] = value
    return df


def write_table(df: pd.DataFrame, path, fmt: str = None) -> Path:
    """
    Write a table as csv (header, no index) or as json lines.  Both are
    byte-reproducible for equal frames.
    """
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".") or "csv"
    path = output_path(path, fmt)
    if fmt == "csv":
        df.to_csv(path, index=False)
    else:
        df.to_json(path, orient="records", lines=True)
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    return "json encode error"


def write_record(path, record: dict) -> Path:
    """Write a run record as indented json."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as file:
        file.write(json.dumps(record, indent=4, default=_json_default))
    return path


def write_jsonl(path, records) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as file:
        for record in records:
            file.write(json.dumps(record, default=_json_default) + "\n")
    return path


def collect_run_records(folder, timestamp=True):
    """
    Flatten every run record in ``folder`` into one row of a csv written to
    the same folder.

    :return: path to the csv.
    """
    folder = Path(folder)
    if not folder.exists():
        raise FileNotFoundError(f"Results folder {folder} not found.")

    csv_name = "collected_results.csv"
    if timestamp:
        timestamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
        csv_name = f"collected_results_{timestamp}.csv"
    csv_path = folder / csv_name

    # want ordered & unique data type
    headers = {}
    data = []
    for record_file in sorted(folder.glob(f"*{RECORD_SUFFIX}")):
        with open(record_file, 'r') as file:
            results = flatten_dict(json.load(file))
        results["record_file"] = record_file.name
        headers.update({x: None for x in results})
        data.append(results)

    # make sure all data cases have the same headers
    for x in data:
        for key in headers:
            if key not in x:
                x[key] = None

    with open(csv_path, 'w') as file:
        writer = csv.DictWriter(file, fieldnames=headers.keys(), lineterminator='\n')
        writer.writeheader()

        for x in data:
            writer.writerow(x)

    logger.info(f"Collected {len(data)} run records into {csv_path}")
    return csv_path
