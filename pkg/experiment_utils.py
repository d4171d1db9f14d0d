"""Utility functions shared by the experiment runners."""

# pylint: disable=too-many-arguments, invalid-name, too-few-public-methods
import os
from itertools import product
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Iterable, List
import logging

from tqdm import tqdm

logger = logging.getLogger("utils")

ARTIFACT_VERSION = "1.0.0"


class ConvergenceError(RuntimeError):
    """An iterative solver stopped at its iteration cap without converging."""


def timer(time_in_s):
    hours, rem = divmod(time_in_s, 3600)
    minutes, seconds = divmod(rem, 60)
    return "{:0>2}:{:0>2}:{:0>2}".format(int(hours), int(minutes), int(seconds))


def format_path(path=None):
    """
    Resolve a user-supplied path.  Relative paths are taken from the current
    working directory first and from the repository root second.
    """
    if path:
        path = Path(path)
        candidates = [path] if path.is_absolute() else [
            Path.cwd() / path,
            Path(__file__).parent.absolute() / path,
        ]
        for candidate in candidates:
            if os.name != "nt":
                candidate = Path(candidate.as_posix())
            if candidate.exists():
                return candidate
        raise FileNotFoundError(f"Path {path} not found.")
    return None


def generate_permutations(list_args: dict) -> list:
    """
    Given a dict of several parameters values which each can take multiple values given as lists,
    return all permutations of the parameters as a list of dicts.

    example input:
    {
        "alpha": [0.0, 0.5],
        "gamma": [0.2, 0.8]
    }

    example output:
    [
        {"alpha": 0.0, "gamma": 0.2},
        {"alpha": 0.0, "gamma": 0.8},
        {"alpha": 0.5, "gamma": 0.2},
        {"alpha": 0.5, "gamma": 0.8}
    ]

    :param list_args: a dictionary of the parameters formatted as {"parameter_name": [parameter_values]}.

    :return: a list of dictionaries, where each dictionary is a permutation of the possible
        parameter combinations.
    """

    return [dict(zip(list_args, v)) for v in product(*list_args.values())]


def find_recent_file(folder, prefix):
    """Find the most recent file in a folder that starts with a certain prefix."""
    folder = Path(folder)
    if not folder.exists():
        return -1
    files_with_prefix = list(folder.glob(f"{prefix}*"))
    if len(files_with_prefix) == 0:
        # no files found
        return -1
    return max(files_with_prefix, key=lambda x: x.stat().st_mtime)


def map_replicates(
    fn: Callable, items: Iterable, workers: int = 1, progress: bool = False, desc: str = None
) -> List:
    """
    Apply ``fn`` to every item, optionally on a process pool.

    Results come back in input order whatever the number of workers, so
    callers that key their randomness by item get identical output for any
    ``workers``.  ``fn`` must be picklable when ``workers > 1``.
    """
    items = list(items)
    if workers < 1:
        raise ValueError(f"Number of workers must be at least 1, got {workers}.")
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=not progress)]
    processes = min(workers, len(items))
    logger.debug(f"Mapping {len(items)} items over {processes} processes.")
    with Pool(processes=processes) as pool:
        return list(
            tqdm(pool.imap(fn, items), total=len(items), desc=desc, disable=not progress)
        )
