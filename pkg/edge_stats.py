"""
Edge-count theory: moment recursions, the densification regimes and their
limits, the martingale diagnostic, and densification-exponent fits.

Functions here take any ``params`` object with ``alpha``, ``beta`` and
``gamma`` attributes and any stats object with ``n``, ``num_vertices`` and
``num_edges``, so the module does not depend on the graph representation.
"""

# pylint: disable=invalid-name
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats as sps

logger = logging.getLogger("EdgeStats")

SPARSE = "sparse"
CRITICAL = "critical"
DENSE = "dense"

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class EdgeMoments:
    """Unconditional mean and variance of E_n."""

    n: int
    mean_E: float
    var_E: float


@dataclass(frozen=True)
class EdgeRegime:
    """
    Densification regime and its limit descriptor.

    ``limit`` is the almost-sure limit of E_n/2^n (sparse) or E_n/(2^n n)
    (critical); ``exponent`` is the densification exponent
    log(1+2gamma+alpha)/log 2 in the dense regime and 1 otherwise.
    """

    regime: str
    limit: Optional[float]
    exponent: float


def _growth(params) -> float:
    return 1.0 + 2.0 * params.gamma + params.alpha


def _conditional_variance_rate(params) -> float:
    return 2.0 * params.gamma * (1.0 - params.gamma) + params.alpha * (1.0 - params.alpha)


def edge_moments(n: int, params, v0: int, e0: float) -> List[EdgeMoments]:
    """
    Iterate the moment recursions up to generation n.

    m(k+1) = r m(k) + 2^k beta v0
    v(k+1) = m(k) (2 gamma (1-gamma) + alpha (1-alpha)) + 2^k v0 beta (1-beta) + r^2 v(k)

    with r = 1 + 2 gamma + alpha, m(0) = e0, v(0) = 0.  The second line is the
    law of total variance applied to the conditional moments of E_{k+1}.
    """
    if n < 0:
        raise ValueError(f"Generation index must be non-negative, got {n}.")
    r = _growth(params)
    s = _conditional_variance_rate(params)
    beta = params.beta
    mean, var = float(e0), 0.0
    out = [EdgeMoments(0, mean, var)]
    for k in range(n):
        vertices = (2 ** k) * v0
        mean, var = (
            r * mean + vertices * beta,
            mean * s + vertices * beta * (1.0 - beta) + r * r * var,
        )
        out.append(EdgeMoments(k + 1, mean, var))
    return out


def expected_edges(n: int, params, v0: int, e0: float) -> float:
    """E(E_n) by iterating m(k+1) = (1+2 gamma+alpha) m(k) + 2^k beta v0 from m(0)=e0."""
    return edge_moments(n, params, v0, e0)[-1].mean_E


def variance_edges(n: int, params, v0: int, e0: float) -> float:
    """Var(E_n) from the total-variance recursion, starting at Var(E_0) = 0."""
    return edge_moments(n, params, v0, e0)[-1].var_E


def expected_edges_closed_form(n: int, params, v0: int, e0: float) -> float:
    """
    Closed form of :func:`expected_edges`.

    Off the critical line, with r = 1+2 gamma+alpha and A = beta v0/(1-2 gamma-alpha),
    E(E_n) = (e0 - A) r^n + A 2^n, which for e0 = 0 is A (2^n - r^n).
    On it, E(E_n) = 2^n (e0 + beta v0 n / 2).
    """
    r = _growth(params)
    if abs(r - 2.0) <= BOUNDARY_TOL:
        return 2.0 ** n * (e0 + params.beta * v0 * n / 2.0)
    A = params.beta * v0 / (2.0 - r)
    return (e0 - A) * r ** n + A * 2.0 ** n


def classify_edge_regime(params, v0: int = 1) -> EdgeRegime:
    """Sign of 2 gamma + alpha - 1, with the limit constant or exponent of the regime."""
    excess = 2.0 * params.gamma + params.alpha - 1.0
    if abs(excess) <= BOUNDARY_TOL:
        return EdgeRegime(CRITICAL, v0 * params.beta / 2.0, 1.0)
    if excess < 0:
        return EdgeRegime(SPARSE, v0 * params.beta / (-excess), 1.0)
    return EdgeRegime(DENSE, None, math.log(_growth(params)) / math.log(2.0))


def martingale_W(stats, params) -> float:
    """
    W_n = (V_n + (2 gamma + alpha - 1) E_n / beta) / (1 + 2 gamma + alpha)^n.

    A martingale for every beta > 0; non-negative in the dense regime.
    """
    if params.beta <= 0:
        raise ValueError("The martingale W_n is only defined for beta > 0.")
    r = _growth(params)
    numerator = stats.num_vertices + (r - 2.0) / params.beta * stats.num_edges
    return numerator / r ** stats.n


def densification_fit(stats: Sequence, window: float = 0.5) -> float:
    """
    Least-squares slope of log E_n against log V_n over the last ``window``
    fraction of the generations.

    :param stats: GenerationStats-like objects in generation order.
    :param window: fraction of generations (from the end) used in the fit.
    :raises ValueError: fewer than four generations with E_n > 0, or a
        degenerate window in which every E_n is equal.
    """
    if not 0 < window <= 1:
        raise ValueError(f"Fit window must lie in (0, 1], got {window}.")
    usable = [s for s in stats if s.num_edges > 0]
    if len(usable) < 4:
        raise ValueError(
            f"Need at least 4 generations with edges for a densification fit, got {len(usable)}."
        )
    size = max(2, int(math.ceil(len(usable) * window)))
    tail = usable[-size:]
    log_e = np.log([s.num_edges for s in tail])
    log_v = np.log([s.num_vertices for s in tail])
    if np.allclose(log_e, log_e[0]):
        raise ValueError("Degenerate densification fit: E_n is constant over the window.")
    return float(sps.linregress(log_v, log_e).slope)


def edge_counts(replicates: Sequence[Sequence]) -> np.ndarray:
    """E_n per replicate (rows) and generation (columns)."""
    return np.array([[s.num_edges for s in stats] for stats in replicates], dtype=np.float64)


def edge_moment_table(replicates: Sequence[Sequence], params, v0: int, e0: float) -> pd.DataFrame:
    """
    Recursion moments of E_n next to their Monte Carlo counterparts.

    :param replicates: one GenerationStats-like sequence per replicate, all
        starting from a graph with ``v0`` vertices and ``e0`` edges.
    :return: DataFrame with columns n, mean_theory, mean_mc, var_theory,
        var_mc, reps.  var_mc is the unbiased sample variance, NaN for one
        replicate.
    """
    counts = edge_counts(replicates)
    reps, generations = counts.shape
    theory = edge_moments(generations - 1, params, v0, e0)
    return pd.DataFrame(
        {
            "n": np.arange(generations),
            "mean_theory": [m.mean_E for m in theory],
            "mean_mc": counts.mean(axis=0),
            "var_theory": [m.var_E for m in theory],
            "var_mc": counts.var(axis=0, ddof=1) if reps > 1 else np.full(generations, np.nan),
            "reps": reps,
        }
    )
