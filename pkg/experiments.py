"""
Run one reproducing-graph experiment: grow graphs, study the degree chain,
sweep the phase diagram, analyze spectra, or the beta = 0 extinction problem.
"""

# pylint: disable=too-many-instance-attributes, too-many-arguments
# pylint: disable=too-many-locals, logging-fstring-interpolation, invalid-name
# pylint: disable=unspecified-encoding
import dataclasses
import datetime
import functools
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import yaml

from bpre import (
    classify_bpre,
    criterion,
    extinction_probability,
    isolation_curve,
    with_survival,
)
from collect_experiment_data import (
    FORMATS,
    output_path,
    record_path,
    sibling_path,
    with_echo,
    write_jsonl,
    write_record,
    write_table,
)
from degree_chain import (
    SUBCRITICAL,
    classify_degree_regime,
    initial_degrees,
    kernel_frame,
    moment,
    moment_finite,
    simulate_ensemble,
    solve_stationary,
    tail_exponent,
    trajectory_moments,
)
from edge_stats import classify_edge_regime, edge_moment_table
from experiment_utils import (
    ARTIFACT_VERSION,
    format_path,
    generate_permutations,
    map_replicates,
    timer,
)
from reprograph import (
    DEFAULT_MAX_EDGES,
    DEFAULT_MAX_VERTICES,
    Params,
    export_dot,
    evolve,
    export_edgelist,
    grow_replicates,
    initial_graph,
    is_preset,
    iterate_graphs,
    replicate_key,
)
from sampling import StreamKey, derive_stream
from spectral import spectral_report

logger = logging.getLogger("Experiment")

COMMANDS = ("grow", "chain", "phase", "spectral", "bpre", "check")
SEED_ENV = "REPROGRAPH_SEED"
DEFAULT_SEED = 20240607
# kernel entries at or below this are left out of <stem>_kernel tables
KERNEL_FLOOR = 1e-15


@dataclass
class ExperimentConfig:
    """
    Everything needed to reproduce a run.  Values come from the dataclass
    defaults, then the yaml config file, then command line flags.
    """

    command: str = "grow"
    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 0.2
    g0: str = "k1"
    steps: int = 7
    reps: int = 1
    seed: Optional[int] = None
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1
    max_vertices: int = DEFAULT_MAX_VERTICES
    max_edges: int = DEFAULT_MAX_EDGES
    # grow
    snapshot: Optional[int] = None
    # chain
    stationary: bool = False
    tail_only: bool = False
    truncation: int = 64
    max_truncation: int = 4096
    trajectory_steps: int = 10000
    burn_in: int = 1000
    moments: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    x0: int = 1
    # phase
    grid_alpha: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    grid_gamma: List[float] = field(default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    empirical: bool = False
    # bpre
    horizon: int = 200
    extinction_reps: int = 10000
    # check
    only: List[str] = field(default_factory=list)
    list_checks: bool = False
    progress: bool = False

    @classmethod
    def from_sources(cls, file=None, overrides: dict = None) -> "ExperimentConfig":
        """
        Merge the yaml file (if any) and the overrides over the defaults, then
        validate.

        :param file: path to a flat yaml mapping of config keys.
        :param overrides: values from the command line; None entries are ignored.
        """
        values = {}
        if file is not None:
            path = format_path(file)
            logger.info(f"Reading config file {path}")
            with open(path, "r") as f:
                loaded = yaml.safe_load(f) or {}
            if not isinstance(loaded, dict):
                raise ValueError(f"Config file {path} must hold a flat key: value mapping.")
            values.update(loaded)
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})

        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ValueError(f"Unknown config keys: {', '.join(unknown)}.")
        config = cls(**values)
        if config.seed is None:
            config.seed = int(os.environ.get(SEED_ENV, DEFAULT_SEED))
        config.validate()
        return config

    def validate(self) -> None:
        """:raises ValueError: / FileNotFoundError: on any invalid setting."""
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command {self.command!r}, expected one of {COMMANDS}.")
        Params(self.alpha, self.beta, self.gamma)
        for name in ("steps", "horizon", "burn_in"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}.")
        for name in ("reps", "workers", "extinction_reps", "trajectory_steps", "truncation"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}.")
        if self.max_truncation < self.truncation:
            raise ValueError(
                f"max_truncation {self.max_truncation} is below truncation {self.truncation}."
            )
        if self.format not in FORMATS:
            raise ValueError(f"Unknown output format {self.format!r}, expected one of {FORMATS}.")
        if self.snapshot is not None and not 0 <= self.snapshot <= self.steps:
            raise ValueError(f"Snapshot generation {self.snapshot} is outside 0..{self.steps}.")
        for name in ("grid_alpha", "grid_gamma"):
            for value in getattr(self, name):
                if not 0.0 <= float(value) <= 1.0:
                    raise ValueError(f"{name} value {value} must lie in [0, 1].")
        if self.x0 < 0:
            raise ValueError(f"x0 must be non-negative, got {self.x0}.")
        if not is_preset(self.g0):
            format_path(self.g0)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


class Experiment:
    """
    One configured run.  ``run()`` dispatches to the ``cmd_<command>`` method,
    which writes its tables; a run record goes next to the main table.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.params = Params(config.alpha, config.beta, config.gamma)
        self.key = StreamKey(config.seed)
        self.out = self.generate_paths()
        self.all_results = {}
        self.outputs = []

    def generate_paths(self) -> Path:
        """The main output file; defaults to ./results/<command>.<format>."""
        out = self.config.out or Path.cwd() / "results" / self.config.command
        return output_path(out, self.config.format)

    def save_variables(self) -> dict:
        """Config echo of this run."""
        return {
            "config": self.config.as_dict(),
            "params": self.params.as_dict(),
            "artifact_version": ARTIFACT_VERSION,
        }

    def echo(self) -> dict:
        return {
            "seed": self.config.seed,
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "gamma": self.params.gamma,
            "g0": self.config.g0,
        }

    def run(self) -> dict:
        if self.config.command == "check":
            raise ValueError("The acceptance suite runs through acceptance.run_acceptance.")
        logger.info(
            f"Running {self.config.command} with alpha={self.params.alpha}, "
            f"beta={self.params.beta}, gamma={self.params.gamma}, seed={self.config.seed}"
        )
        since = time.time()
        getattr(self, f"cmd_{self.config.command}")()
        elapsed = time.time() - since
        return self.save_results(elapsed)

    def _write(self, df: pd.DataFrame, path=None) -> Path:
        written = write_table(with_echo(df, self.echo()), path or self.out, self.config.format)
        self.outputs.append(str(written))
        return written

    # ------------------------------------------------------------------ grow

    def cmd_grow(self) -> pd.DataFrame:
        cfg = self.config
        g0 = initial_graph(cfg.g0)
        replicates = grow_replicates(
            g0,
            self.params,
            cfg.steps,
            cfg.reps,
            self.key,
            workers=cfg.workers,
            max_vertices=cfg.max_vertices,
            max_edges=cfg.max_edges,
            progress=cfg.progress,
        )
        rows = []
        for rep, stats in enumerate(replicates):
            for s in stats:
                row = {"rep": rep, **s.as_row()}
                if cfg.format == "jsonl":
                    row["degree_histogram"] = {str(d): c for d, c in s.degree_histogram.items()}
                rows.append(row)
        df = pd.DataFrame(rows)
        self._write(df)
        moments = edge_moment_table(replicates, self.params, g0.num_vertices, g0.num_edges)
        self._write(moments, sibling_path(self.out, "moments"))

        if cfg.snapshot is not None:
            self.write_snapshot(g0, cfg.snapshot)

        finals = [stats[-1] for stats in replicates]
        self.all_results = {
            "final_generation": cfg.steps,
            "final_vertices": finals[0].num_vertices,
            "final_edges_mean": float(np.mean([s.num_edges for s in finals])),
            "final_isolated_fraction_mean": float(np.mean([s.isolated_fraction for s in finals])),
        }
        return df

    def write_snapshot(self, g0, n: int):
        """DOT and edge-list files of G_n of replicate 0."""
        cfg = self.config
        key = replicate_key(self.key, 0)
        g = g0
        for _ in range(n):
            g = evolve(g, self.params, key, cfg.max_vertices, cfg.max_edges)
        dot = export_dot(g, sibling_path(self.out, f"g{n}", ".dot"))
        edges = export_edgelist(g, sibling_path(self.out, f"g{n}", ".edges"))
        self.outputs.extend([str(dot), str(edges)])
        logger.info(f"Snapshot of G_{n} written to {dot} and {edges}")

    # ----------------------------------------------------------------- chain

    def cmd_chain(self) -> Optional[pd.DataFrame]:
        cfg = self.config
        p_star = tail_exponent(self.params)
        if cfg.tail_only:
            print(_format_p_star(p_star))
            self.all_results = {"p_star": p_star}
            return None
        if cfg.stationary:
            return self.stationary_tables(p_star)

        df = trajectory_moments(
            self.params,
            cfg.moments,
            cfg.trajectory_steps,
            self.key,
            x0=cfg.x0,
            burn_in=cfg.burn_in,
        )
        df["p_star"] = _p_star_value(p_star)
        self._write(df)
        self.all_results = {"p_star": p_star, "final_moments": df.iloc[-1].to_dict()}
        return df

    def stationary_tables(self, p_star) -> pd.DataFrame:
        cfg = self.config
        regime = classify_degree_regime(self.params)
        if regime != SUBCRITICAL:
            raise ValueError(
                f"(1+gamma)(alpha+gamma) = {self.params.degree_product:.6f} >= 1: the degree "
                "chain is transient (or null recurrent) and has no stationary distribution."
            )
        solution = solve_stationary(
            self.params, truncation=cfg.truncation, max_truncation=cfg.max_truncation
        )
        pi = solution.distribution
        mean = moment(pi, 1.0)
        edge_rate = 2.0 * self.params.gamma + self.params.alpha
        mean_theory = 2.0 * self.params.beta / (1.0 - edge_rate) if edge_rate < 1.0 else math.inf
        df = pd.DataFrame({"x": np.arange(pi.size), "probability": pi})
        df["mean"] = mean
        df["mean_theory"] = mean_theory
        df["p_star"] = _p_star_value(p_star)
        df["regime"] = regime
        df["D"] = solution.kernel.D
        df["lumped_mass"] = solution.lumped_mass
        self._write(df)

        moments = pd.DataFrame(
            {
                "p": cfg.moments,
                "moment": [moment(pi, p) for p in cfg.moments],
                "finite": [moment_finite(self.params, p) for p in cfg.moments],
            }
        )
        self._write(moments, sibling_path(self.out, "moments"))
        kernel = kernel_frame(solution.kernel, floor=KERNEL_FLOOR)
        self._write(kernel, sibling_path(self.out, "kernel"))
        self.all_results = {
            "mean": mean,
            "mean_theory": mean_theory,
            "p_star": p_star,
            "regime": regime,
            "D": solution.kernel.D,
            "lumped_mass": solution.lumped_mass,
        }
        return df

    # ----------------------------------------------------------------- phase

    def cmd_phase(self) -> pd.DataFrame:
        cfg = self.config
        grid = generate_permutations(
            {"alpha": [float(a) for a in cfg.grid_alpha], "gamma": [float(g) for g in cfg.grid_gamma]}
        )
        g0 = initial_graph(cfg.g0) if cfg.empirical else None
        rows = []
        for i, point in enumerate(grid):
            params = Params(point["alpha"], cfg.beta, point["gamma"])
            edge = classify_edge_regime(params, v0=1)
            bpre_verdict = classify_bpre(Params(point["alpha"], 0.0, point["gamma"]))
            row = {
                "grid_alpha": params.alpha,
                "grid_gamma": params.gamma,
                "degree_product": params.degree_product,
                "degree_regime": classify_degree_regime(params),
                "edge_rate": 2.0 * params.gamma + params.alpha,
                "edge_regime": edge.regime,
                "densification_exponent": edge.exponent,
                "p_star": _p_star_value(tail_exponent(params)),
                "bpre_criterion": criterion(params),
                "bpre_verdict": bpre_verdict.verdict,
                "bpre_boundary": bpre_verdict.boundary,
            }
            if cfg.empirical:
                key = derive_stream(self.key, [i])
                x0 = initial_degrees(g0, cfg.reps, derive_stream(key, [0]))
                finals = simulate_ensemble(
                    params, x0, cfg.steps, cfg.reps, derive_stream(key, [1]), workers=cfg.workers
                )
                row["mc_mean_degree"] = float(finals.mean())
                row["mc_zero_fraction"] = float(np.mean(finals == 0))
            rows.append(row)
        df = pd.DataFrame(rows)
        self._write(df)
        self.all_results = {
            "grid_points": len(rows),
            "degree_regimes": df["degree_regime"].value_counts().to_dict(),
            "edge_regimes": df["edge_regime"].value_counts().to_dict(),
        }
        return df

    # -------------------------------------------------------------- spectral

    def cmd_spectral(self) -> pd.DataFrame:
        cfg = self.config
        if self.params.beta != 1.0:
            logger.warning(
                f"beta = {self.params.beta}: graphs may be disconnected and lambda_1 is then 0."
            )
        g0 = initial_graph(cfg.g0)
        fn = functools.partial(
            _spectral_path,
            g0=g0,
            params=self.params,
            steps=cfg.steps,
            key=self.key,
            max_vertices=cfg.max_vertices,
            max_edges=cfg.max_edges,
        )
        paths = map_replicates(
            fn, range(cfg.reps), workers=cfg.workers, progress=cfg.progress, desc="spectral"
        )
        rows = [row for path in paths for row in path]
        columns = [
            "rep", "n", "lambda_1", "lambda_max", "spectral_radius", "cheeger_sweep",
            "cheeger_exact", "num_vertices", "components",
        ]
        df = pd.DataFrame(rows, columns=columns)
        self._write(df)
        last = df[df["n"] == df["n"].max()]
        self.all_results = {
            "final_lambda_1_median": float(last["lambda_1"].median()) if len(last) else None,
        }
        return df

    # ------------------------------------------------------------------ bpre

    def cmd_bpre(self) -> pd.DataFrame:
        cfg = self.config
        verdict = classify_bpre(self.params)
        g0 = initial_graph(cfg.g0)
        curve = isolation_curve(
            g0,
            self.params,
            cfg.steps,
            cfg.reps,
            derive_stream(self.key, [1]),
            workers=cfg.workers,
            max_vertices=cfg.max_vertices,
            max_edges=cfg.max_edges,
            progress=cfg.progress,
        )
        df = curve.to_frame()
        self._write(df)

        estimate = extinction_probability(
            self.params,
            max(1, cfg.x0),
            cfg.horizon,
            cfg.extinction_reps,
            derive_stream(self.key, [2]),
            workers=cfg.workers,
        )
        verdict = with_survival(verdict, estimate)
        record = {
            **self.echo(),
            **dataclasses.asdict(verdict),
            **dataclasses.asdict(estimate),
            "half_width": estimate.half_width,
            "horizon_lower_bound": True,
        }
        extinction_file = write_jsonl(sibling_path(self.out, "extinction", ".jsonl"), [record])
        self.outputs.append(str(extinction_file))
        self.all_results = {
            "verdict": verdict.verdict,
            "criterion_value": verdict.criterion_value,
            "final_isolated_fraction_mean": float(df["isolated_fraction_mean"].iloc[-1]),
            "monotone": bool(df["monotone"].all()),
            "extinction_probability": estimate.probability,
        }
        return df

    # --------------------------------------------------------------- records

    def save_results(self, elapsed: float) -> dict:
        """Write the run record next to the main table."""
        record = {
            **self.save_variables(),
            "results": self.all_results,
            "outputs": self.outputs,
            "wall_time": timer(elapsed),
            "wall_seconds": elapsed,
            "timestamp": datetime.datetime.now().strftime("%Y%m%d-%H%M%S"),
        }
        if self.outputs:
            write_record(record_path(self.out), record)
        return record


def _spectral_path(rep, g0, params, steps, key, max_vertices, max_edges):
    rows = []
    graphs = iterate_graphs(g0, params, steps, replicate_key(key, rep), max_vertices, max_edges)
    for g in graphs:
        if g.num_vertices < 2:
            continue
        rows.append({"rep": rep, **spectral_report(g).as_row()})
    return rows


def _p_star_value(p_star):
    """p* for tables: None (every moment finite) is written as inf."""
    return math.inf if p_star is None else p_star


def _format_p_star(p_star) -> str:
    return "inf" if p_star is None else f"{p_star:.6f}"
