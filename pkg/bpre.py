"""
The beta = 0 case, where the degree chain is a branching process in a random
environment: each generation every edge end of the followed lineage has
offspring Bin(1, gamma) + 1 (parent step) or Bin(1, alpha) + Bin(1, gamma)
(child step), chosen by a fair coin.
"""

# pylint: disable=invalid-name, too-many-arguments, too-many-locals, logging-fstring-interpolation
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats as sps

from degree_chain import initial_degrees, simulate_ensemble
from reprograph import (
    DEFAULT_MAX_EDGES,
    DEFAULT_MAX_VERTICES,
    Params,
    ReproGraph,
    grow_replicates,
)
from sampling import StreamKey, derive_stream, generator

logger = logging.getLogger("Bpre")

EXTINCT = "extinct-as"
SURVIVES = "survives-wp-q"

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class BpreVerdict:
    """
    Extinction verdict from the sign of 1/2 log(1+gamma) + 1/2 log(alpha+gamma).

    The boundary value 0 counts as extinct; ``degenerate`` marks boundary
    points where both offspring laws are deterministic and the chain is
    constant instead.
    """

    criterion_value: float
    verdict: str
    boundary: bool = False
    degenerate: bool = False
    q_estimate: Optional[float] = None
    q_half_width: Optional[float] = None


@dataclass(frozen=True)
class ExtinctionEstimate:
    """Fraction of chains absorbed at 0 within ``horizon`` steps, a lower bound on P(extinction)."""

    probability: float
    low: float
    high: float
    extinct: int
    reps: int
    x0: int
    horizon: int

    @property
    def half_width(self) -> float:
        return (self.high - self.low) / 2.0


@dataclass
class IsolationCurve:
    """Isolated fraction of G_0..G_steps for every replicate path (rows)."""

    paths: np.ndarray

    @property
    def monotone(self) -> np.ndarray:
        """Per generation: whether every path is non-decreasing up to it."""
        if self.paths.shape[1] < 2:
            return np.ones(self.paths.shape[1], dtype=bool)
        steps_ok = np.all(np.diff(self.paths, axis=1) >= 0, axis=0)
        return np.concatenate([[True], np.logical_and.accumulate(steps_ok)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "step": np.arange(self.paths.shape[1]),
                "isolated_fraction_mean": self.paths.mean(axis=0),
                "isolated_fraction_min": self.paths.min(axis=0),
                "isolated_fraction_max": self.paths.max(axis=0),
                "monotone": self.monotone,
            }
        )


@dataclass(frozen=True)
class EnvironmentMeans:
    parent: float
    parent_se: float
    child: float
    child_se: float


def _require_beta_zero(params: Params):
    if params.beta != 0.0:
        raise ValueError(
            f"The branching-process analysis needs beta = 0, got beta = {params.beta}."
        )


def criterion(params: Params) -> float:
    """1/2 log(1+gamma) + 1/2 log(alpha+gamma); -inf when alpha + gamma = 0."""
    if params.alpha + params.gamma == 0.0:
        return -math.inf
    return 0.5 * math.log(1.0 + params.gamma) + 0.5 * math.log(params.alpha + params.gamma)


def classify_bpre(params: Params) -> BpreVerdict:
    _require_beta_zero(params)
    value = criterion(params)
    boundary = abs(value) <= BOUNDARY_TOL
    degenerate = boundary and params.alpha in (0.0, 1.0) and params.gamma in (0.0, 1.0)
    if degenerate:
        logger.warning(
            f"alpha={params.alpha}, gamma={params.gamma} sits on the extinction boundary with "
            "deterministic offspring: the degree never changes and never reaches 0."
        )
    verdict = EXTINCT if value <= BOUNDARY_TOL else SURVIVES
    return BpreVerdict(value, verdict, boundary=boundary, degenerate=degenerate)


def extinction_probability(
    params: Params,
    x0: int,
    horizon: int,
    reps: int,
    key: StreamKey,
    workers: int = 1,
    confidence: float = 0.95,
) -> ExtinctionEstimate:
    """
    Monte Carlo estimate of P(X_n = 0 for some n <= horizon | X_0 = x0) with a
    Wilson confidence interval.  Zero is absorbing when beta = 0, so a chain
    is extinct by the horizon iff its final state is 0.
    """
    _require_beta_zero(params)
    if x0 < 1:
        raise ValueError(f"Starting degree must be at least 1, got {x0}.")
    if reps < 1:
        raise ValueError(f"Need at least one replicate, got {reps}.")
    finals = simulate_ensemble(params, x0, horizon, reps, key, workers=workers)
    extinct = int(np.count_nonzero(finals == 0))
    interval = sps.binomtest(extinct, reps).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    estimate = ExtinctionEstimate(
        extinct / reps, float(interval.low), float(interval.high), extinct, reps, int(x0), int(horizon)
    )
    logger.info(
        f"Extinction by step {horizon} from x0={x0}: {estimate.probability:.4f} "
        f"+/- {estimate.half_width:.4f} ({reps} reps)"
    )
    return estimate


def with_survival(verdict: BpreVerdict, estimate: ExtinctionEstimate) -> BpreVerdict:
    """Attach the survival probability q = 1 - P(extinction) to a verdict."""
    return BpreVerdict(
        verdict.criterion_value,
        verdict.verdict,
        boundary=verdict.boundary,
        degenerate=verdict.degenerate,
        q_estimate=1.0 - estimate.probability,
        q_half_width=estimate.half_width,
    )


def isolation_curve(
    g0: ReproGraph,
    params: Params,
    steps: int,
    reps: int,
    key: StreamKey,
    workers: int = 1,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_edges: int = DEFAULT_MAX_EDGES,
    progress: bool = False,
) -> IsolationCurve:
    """
    Grow ``reps`` full graphs and record their isolated fractions.  Replicate r
    uses derive_stream(key, [TAG_REPLICATE, r]).
    """
    _require_beta_zero(params)
    replicates = grow_replicates(
        g0,
        params,
        steps,
        reps,
        key,
        workers=workers,
        max_vertices=max_vertices,
        max_edges=max_edges,
        progress=progress,
    )
    paths = [[s.isolated_fraction for s in stats] for stats in replicates]
    return IsolationCurve(np.array(paths, dtype=np.float64))


def predicted_isolated_fraction(
    g0: ReproGraph, params: Params, steps: int, reps: int, key: StreamKey, workers: int = 1
) -> float:
    """
    P(X_steps = 0) with X_0 the degree of a uniform vertex of G_0.  This is the
    expected isolated fraction of G_steps, estimated from the degree chain.
    """
    x0 = initial_degrees(g0, reps, derive_stream(key, [0]))
    finals = simulate_ensemble(params, x0, steps, reps, derive_stream(key, [1]), workers=workers)
    return float(np.mean(finals == 0))


def environment_means(params: Params, x: int, reps: int, key: StreamKey) -> EnvironmentMeans:
    """
    Mean offspring per edge end in each environment given X_n = x: X'/x after a
    parent step (expected 1 + gamma) and after a child step (expected alpha + gamma).
    """
    _require_beta_zero(params)
    if x < 1:
        raise ValueError(f"Conditioning degree must be at least 1, got {x}.")
    gen = generator(key)
    y = gen.binomial(x, params.gamma, size=reps)
    w = gen.binomial(x, params.alpha, size=reps)
    parent = (x + y) / x
    child = (w + y) / x
    denom = math.sqrt(reps)
    return EnvironmentMeans(
        float(parent.mean()),
        float(parent.std(ddof=1) / denom) if reps > 1 else 0.0,
        float(child.mean()),
        float(child.std(ddof=1) / denom) if reps > 1 else 0.0,
    )
