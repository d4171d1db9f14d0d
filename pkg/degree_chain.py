"""
The degree Markov chain X_n of a lineage vertex.

X_{n+1} = xi X_n + (1 - xi) W + Y + Z with xi ~ Ber(1/2), Y ~ Bin(X_n, gamma),
W ~ Bin(X_n, alpha), Z ~ Ber(beta), all conditionally independent.  This module
simulates it (keyed and coupled, or fast and uncoupled), builds its exact
truncated kernel, solves for the stationary law and computes the moment and
tail quantities that go with it.
"""

# pylint: disable=invalid-name, too-many-arguments, too-many-locals, logging-fstring-interpolation
import functools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import optimize, signal
from scipy import stats as sps

from experiment_utils import ConvergenceError, map_replicates
from reprograph import Params, ReproGraph
from sampling import (
    TAG_BLOCK,
    TAG_W,
    TAG_XI,
    TAG_Y,
    TAG_Z,
    StreamKey,
    bernoulli_words,
    binomial_words,
    child_words,
    derive_stream,
    fold_words,
    generator,
    replicate_blocks,
)

logger = logging.getLogger("DegreeChain")

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"

BOUNDARY_TOL = 1e-12
BLOCK_SIZE = 4096
ESCAPE_THRESHOLD = 2 ** 40


@dataclass(frozen=True)
class ChainState:
    x: int
    step: int = 0

    def __post_init__(self):
        if self.x < 0:
            raise ValueError(f"Degree must be non-negative, got {self.x}.")


@dataclass
class DegreeKernel:
    """Transition matrix on 0..D; mass that would land above D is lumped at D."""

    params: Params
    D: int
    matrix: np.ndarray


@dataclass
class StationarySolution:
    kernel: DegreeKernel
    distribution: np.ndarray
    lumped_mass: float


@dataclass(frozen=True)
class CoupledDistance:
    mean: float
    standard_error: float
    expected: float
    reps: int


@dataclass(frozen=True)
class MomentRatio:
    """Monte Carlo estimates of the parent-step and child-step moment ratios."""

    parent: float
    parent_se: float
    child: float
    child_se: float


# ---------------------------------------------------------------------------
# keyed simulation


def chain_step_words(xs, params: Params, words) -> np.ndarray:
    """One keyed step for every (x_i, word_i); the batch form of :func:`chain_step`."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    words = np.atleast_1d(np.asarray(words, dtype=np.uint64))
    xi = bernoulli_words(fold_words(words, TAG_XI), 0.5)
    y = binomial_words(fold_words(words, TAG_Y), xs, params.gamma)
    w = binomial_words(fold_words(words, TAG_W), xs, params.alpha)
    z = bernoulli_words(fold_words(words, TAG_Z), params.beta).astype(np.int64)
    return np.where(xi, xs, w) + y + z


def chain_step(x: int, params: Params, key: StreamKey) -> int:
    """One draw of X_{n+1} given X_n = x."""
    if x < 0:
        raise ValueError(f"Degree must be non-negative, got {x}.")
    return int(chain_step_words(np.array([x]), params, np.array([key.word]))[0])


def chain_step_many(xs, params: Params, key: StreamKey) -> np.ndarray:
    """Entry i equals chain_step(xs[i], params, derive_stream(key, [i]))."""
    xs = np.asarray(xs, dtype=np.int64)
    return chain_step_words(xs, params, child_words(key, np.arange(xs.size)))


def advance(state: ChainState, params: Params, key: StreamKey) -> ChainState:
    """Step a keyed trajectory; step n draws from derive_stream(key, [n])."""
    x = chain_step(state.x, params, derive_stream(key, [state.step]))
    return ChainState(x, state.step + 1)


def coupled_step(x: int, x_hat: int, params: Params, key: StreamKey):
    """
    Step two copies with the same xi, Z and Bernoulli trials.

    The binomials share their leading trials, so x >= x_hat implies
    X' >= X_hat' path by path.
    """
    words = np.array([key.word, key.word])
    a, b = chain_step_words(np.array([x, x_hat]), params, words)
    return int(a), int(b)


def coupled_distance(
    x: int, x_hat: int, params: Params, reps: int, key: StreamKey
) -> CoupledDistance:
    """Mean one-step coupled distance E|X' - X_hat'| with its standard error."""
    words = child_words(key, np.arange(reps))
    a = chain_step_words(np.full(reps, x), params, words)
    b = chain_step_words(np.full(reps, x_hat), params, words)
    d = np.abs(a - b).astype(np.float64)
    expected = abs(x - x_hat) * params.edge_growth / 2.0
    se = float(d.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan")
    return CoupledDistance(float(d.mean()), se, expected, reps)


# ---------------------------------------------------------------------------
# fast uncoupled ensembles


def _fast_step(x: np.ndarray, params: Params, gen: np.random.Generator, escape: int = None):
    m = x.size
    xi = gen.random(m) < 0.5
    y = gen.binomial(x, params.gamma)
    w = gen.binomial(x, params.alpha)
    z = (gen.random(m) < params.beta).astype(np.int64)
    nxt = np.where(xi, x, w) + y + z
    if escape is not None:
        nxt = np.where(x >= escape, x, nxt)
    return nxt


def _simulate_block(block, params: Params, steps: int, key: StreamKey, escape: int):
    index, x0 = block
    gen = generator(derive_stream(key, [TAG_BLOCK, index]))
    x = np.asarray(x0, dtype=np.int64).copy()
    for _ in range(steps):
        x = _fast_step(x, params, gen, escape)
    return x


def simulate_ensemble(
    params: Params,
    x0,
    steps: int,
    reps: int,
    key: StreamKey,
    block_size: int = BLOCK_SIZE,
    escape_threshold: Optional[int] = ESCAPE_THRESHOLD,
    workers: int = 1,
) -> np.ndarray:
    """
    Final states of ``reps`` independent chains after ``steps`` steps.

    Replicates are cut into fixed blocks, each with its own generator, so the
    result does not depend on ``workers``.  Chains at or above
    ``escape_threshold`` are frozen there.

    :param x0: a starting degree, or one per replicate.
    """
    x0 = np.broadcast_to(np.asarray(x0, dtype=np.int64), (reps,))
    if np.any(x0 < 0):
        raise ValueError("Starting degrees must be non-negative.")
    blocks = [(b, x0[start:stop]) for b, start, stop in replicate_blocks(reps, block_size)]
    fn = functools.partial(
        _simulate_block, params=params, steps=steps, key=key, escape=escape_threshold
    )
    parts = map_replicates(fn, blocks, workers=workers)
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def initial_degrees(g0: ReproGraph, reps: int, key: StreamKey) -> np.ndarray:
    """X_0 for each replicate: the degree of a uniformly chosen vertex of G_0."""
    idx = generator(key).integers(0, g0.num_vertices, size=reps)
    return g0.degrees[idx].astype(np.int64)


def trajectory_moments(
    params: Params,
    p_values: Sequence[float],
    steps: int,
    key: StreamKey,
    x0: int = 1,
    burn_in: int = 1000,
    checkpoints: int = 20,
    escape_threshold: Optional[int] = ESCAPE_THRESHOLD,
) -> pd.DataFrame:
    """
    Running empirical p-th moments along one long trajectory after burn-in.

    Below the tail exponent the columns settle; above it they keep drifting
    upward as the trajectory gets longer.

    :return: DataFrame with columns step, x, and m_<p> per p.
    """
    gen = generator(key)
    x = int(x0)
    for _ in range(burn_in):
        x = int(_fast_step(np.array([x]), params, gen, escape_threshold)[0])
    marks = set(np.unique(np.linspace(1, steps, num=min(checkpoints, steps), dtype=np.int64)).tolist())
    p_values = [float(p) for p in p_values]
    sums = np.zeros(len(p_values))
    rows = []
    for t in range(1, steps + 1):
        x = int(_fast_step(np.array([x]), params, gen, escape_threshold)[0])
        sums += np.power(float(x), p_values)
        if t in marks:
            row = {"step": t, "x": x}
            row.update({f"m_{p:g}": s / t for p, s in zip(p_values, sums)})
            rows.append(row)
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# exact kernel and stationary law


def _kernel_row(x: int, params: Params, D: int) -> np.ndarray:
    k = np.arange(x + 1)
    p_y = sps.binom.pmf(k, x, params.gamma)
    p_w = sps.binom.pmf(k, x, params.alpha)
    p_z = np.array([1.0 - params.beta, params.beta])

    full = np.zeros(2 * x + 2)
    full[x:] += 0.5 * signal.convolve(p_y, p_z)
    child = signal.convolve(signal.convolve(p_w, p_y), p_z)
    full[: child.size] += 0.5 * child
    np.clip(full, 0.0, None, out=full)

    row = np.zeros(D + 1)
    keep = min(D, full.size)
    row[:keep] = full[:keep]
    row[D] = max(0.0, 1.0 - row[:D].sum())
    return row


def build_kernel(params: Params, D: int) -> DegreeKernel:
    """rows[x][y] = P(X_{n+1} = y | X_n = x) for y < D, residual mass at D."""
    if D < 1:
        raise ValueError(f"Truncation degree must be at least 1, got {D}.")
    matrix = np.vstack([_kernel_row(x, params, D) for x in range(D + 1)])
    return DegreeKernel(params, int(D), matrix)


def kernel_frame(kernel: DegreeKernel, floor: float = 0.0) -> pd.DataFrame:
    """
    The kernel in long form, one row per transition with probability above
    ``floor``, ordered by x then y.

    :return: DataFrame with columns x, y, probability.
    """
    x, y = np.nonzero(kernel.matrix > floor)
    return pd.DataFrame({"x": x, "y": y, "probability": kernel.matrix[x, y]})


def stationary_distribution(
    kernel: DegreeKernel, tol: float = 1e-10, max_iter: int = 100000
) -> np.ndarray:
    """
    Power iteration from a point mass at 0 until ||pi P - pi||_1 < tol.

    :raises ValueError: alpha = 1 or gamma = 1 (the chain is non-decreasing).
    :raises ConvergenceError: no convergence within ``max_iter`` iterations.
    """
    params = kernel.params
    if params.alpha == 1.0 or params.gamma == 1.0:
        raise ValueError(
            "With alpha = 1 or gamma = 1 the degree chain is non-decreasing and has "
            "no stationary distribution."
        )
    if params.beta == 0.0:
        logger.warning("beta = 0: zero is absorbing, the stationary law is the point mass at 0.")
    regime = classify_degree_regime(params)
    if regime != SUBCRITICAL:
        logger.warning(
            f"(1+gamma)(alpha+gamma) = {params.degree_product:.6f} is not below 1 "
            f"({regime}); the truncated solution has no untruncated counterpart."
        )
    P = kernel.matrix
    pi = np.zeros(kernel.D + 1)
    pi[0] = 1.0
    for it in range(1, max_iter + 1):
        nxt = pi @ P
        diff = float(np.abs(nxt - pi).sum())
        pi = nxt
        if diff < tol:
            logger.debug(f"Power iteration converged after {it} iterations (D={kernel.D}).")
            break
    else:
        raise ConvergenceError(
            f"Power iteration did not reach tolerance {tol} in {max_iter} iterations."
        )
    np.clip(pi, 0.0, None, out=pi)
    return pi / pi.sum()


def solve_stationary(
    params: Params,
    tol: float = 1e-10,
    truncation: int = 64,
    max_truncation: int = 4096,
    mass_tol: float = 1e-9,
    max_iter: int = 100000,
) -> StationarySolution:
    """
    Double the truncation degree until the stationary mass lumped at D drops
    below ``mass_tol`` or ``max_truncation`` is reached.
    """
    D = max(1, int(truncation))
    while True:
        kernel = build_kernel(params, D)
        pi = stationary_distribution(kernel, tol=tol, max_iter=max_iter)
        lumped = float(pi[-1])
        if lumped < mass_tol or D >= max_truncation:
            break
        D = min(2 * D, max_truncation)
    if lumped >= mass_tol:
        logger.warning(
            f"Lumped stationary mass at D={D} is {lumped:.3e}, above {mass_tol:.1e}; "
            "the tail is heavier than the truncation can hold."
        )
    return StationarySolution(kernel, pi, lumped)


# ---------------------------------------------------------------------------
# regimes, moments and tails


def classify_degree_regime(params: Params) -> str:
    """subcritical / critical / supercritical by the sign of (1+gamma)(alpha+gamma) - 1."""
    excess = params.degree_product - 1.0
    if abs(excess) <= BOUNDARY_TOL:
        return CRITICAL
    return SUBCRITICAL if excess < 0 else SUPERCRITICAL


def _moment_balance(params: Params, p: float) -> float:
    return (1.0 + params.gamma) ** p + (params.alpha + params.gamma) ** p - 2.0


def tail_exponent(params: Params) -> Optional[float]:
    """
    The positive root p* of (1+gamma)^p + (alpha+gamma)^p = 2.

    :return: p* when gamma > 0 and (1+gamma)(alpha+gamma) < 1; 0 when
        (1+gamma)(alpha+gamma) >= 1; None when gamma = 0 (every moment finite).
    """
    if classify_degree_regime(params) != SUBCRITICAL:
        return 0.0
    if params.gamma == 0.0:
        return None
    f = functools.partial(_moment_balance, params)
    lo, hi = 1e-6, 64.0
    while f(lo) >= 0 and lo > 1e-15:
        lo /= 10.0
    while f(hi) <= 0:
        hi *= 2.0
    return float(optimize.bisect(f, lo, hi, xtol=1e-12, maxiter=500))


def moment_finite(params: Params, p: float) -> Optional[bool]:
    """Whether the stationary law has a finite p-th moment; None on the boundary."""
    if classify_degree_regime(params) != SUBCRITICAL:
        return False
    value = _moment_balance(params, p)
    if abs(value) <= BOUNDARY_TOL:
        return None
    return value < 0


def moment(values, p: float, kind: str = "pmf") -> float:
    """
    p-th moment of a probability vector on 0..D (``kind="pmf"``) or the
    empirical p-th moment of a sample (``kind="sample"``).
    """
    if p <= 0:
        raise ValueError(f"Moment order must be positive, got {p}.")
    values = np.asarray(values, dtype=np.float64)
    if kind == "pmf":
        return float(np.sum(np.arange(values.size, dtype=np.float64) ** p * values))
    if kind == "sample":
        return float(np.mean(values ** p))
    raise ValueError(f"Unknown moment kind {kind!r}, expected 'pmf' or 'sample'.")


def conditional_moment_ratio(
    x: int, params: Params, p: float, reps: int, key: StreamKey
) -> MomentRatio:
    """
    Estimates of E[((1+x+Y+Z)/(1+x))^p] and E[((1+W+Y+Z)/(1+x))^p] given X_n = x.

    As x grows these approach (1+gamma)^p and (alpha+gamma)^p.
    """
    if x < 1:
        raise ValueError(f"Conditioning degree must be at least 1, got {x}.")
    gen = generator(key)
    y = gen.binomial(x, params.gamma, size=reps)
    w = gen.binomial(x, params.alpha, size=reps)
    z = (gen.random(reps) < params.beta).astype(np.int64)
    parent = ((1.0 + x + y + z) / (1.0 + x)) ** p
    child = ((1.0 + w + y + z) / (1.0 + x)) ** p
    denom = math.sqrt(reps)
    return MomentRatio(
        float(parent.mean()),
        float(parent.std(ddof=1) / denom) if reps > 1 else 0.0,
        float(child.mean()),
        float(child.std(ddof=1) / denom) if reps > 1 else 0.0,
    )


def empirical_distribution(samples, D: int) -> np.ndarray:
    """Histogram on 0..D with values >= D lumped at D, normalized."""
    samples = np.minimum(np.asarray(samples, dtype=np.int64), D)
    counts = np.bincount(samples, minlength=D + 1)
    return counts / counts.sum()


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    size = max(p.size, q.size)
    p = np.pad(p, (0, size - p.size))
    q = np.pad(q, (0, size - q.size))
    return 0.5 * float(np.abs(p - q).sum())


def tail_slope(pi, d_lo: int = 20, d_hi: int = 200) -> float:
    """Slope of log pi(d) against log d for d_lo <= d <= d_hi."""
    pi = np.asarray(pi, dtype=np.float64)
    d = np.arange(d_lo, min(d_hi, pi.size - 1) + 1)
    mass = pi[d]
    keep = mass > 0
    if keep.sum() < 2:
        raise ValueError(f"Not enough positive mass between degrees {d_lo} and {d_hi}.")
    return float(sps.linregress(np.log(d[keep]), np.log(mass[keep])).slope)
