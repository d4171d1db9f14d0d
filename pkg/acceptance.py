"""
Desk-scale acceptance checks of the model's limit laws.  Each check grows
graphs or runs the degree chain at sizes that finish in about a minute, and
compares against the exact or asymptotic prediction with a stated tolerance.
"""

# pylint: disable=invalid-name, too-many-locals, logging-fstring-interpolation
import filecmp
import logging
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from bpre import extinction_probability, isolation_curve
from degree_chain import (
    conditional_moment_ratio,
    coupled_distance,
    solve_stationary,
    tail_exponent,
    tail_slope,
    total_variation,
)
from edge_stats import densification_fit, edge_counts, edge_moment_table, martingale_W
from experiment_utils import map_replicates, timer
from experiments import Experiment, ExperimentConfig
from reprograph import (
    Params,
    degree_proportions,
    evolve,
    generation_stats,
    grow,
    grow_replicates,
    initial_graph,
    iterate_graphs,
    replicate_key,
)
from sampling import StreamKey, derive_stream
from spectral import spectral_report

logger = logging.getLogger("Acceptance")

SE_TOLERANCE = 4.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    fn: Callable


def _key(seed: int, index: int) -> StreamKey:
    return derive_stream(StreamKey(seed), [0xACC, index])


def _within_se(estimate: float, target: float, se: float, k: float = SE_TOLERANCE) -> bool:
    if se == 0.0:
        return math.isclose(estimate, target, rel_tol=1e-12, abs_tol=1e-12)
    return abs(estimate - target) <= k * se


def check_edges(seed: int, workers: int, reps: int = 10000) -> CheckResult:
    """Mean and variance of E_n, n <= 8, from K2 against the moment recursions."""
    g0 = initial_graph("k2")
    steps = 8
    failures = []
    for i, triple in enumerate([(0.3, 0.5, 0.2), (0.0, 1.0, 0.2), (0.0, 1.0, 1.0)]):
        params = Params(*triple)
        n_reps = 1 if params.deterministic else reps
        replicates = grow_replicates(g0, params, steps, n_reps, _key(seed, i), workers=workers)
        table = edge_moment_table(replicates, params, g0.num_vertices, g0.num_edges)
        counts = edge_counts(replicates)
        for n in range(1, steps + 1):
            row = table.iloc[n]
            sample = counts[:, n]
            mean_se = sample.std(ddof=1) / math.sqrt(n_reps) if n_reps > 1 else 0.0
            if not _within_se(row.mean_mc, row.mean_theory, mean_se):
                failures.append(f"{triple} n={n} mean {row.mean_mc:.3f} vs {row.mean_theory:.3f}")
            if n_reps > 1:
                centered = sample - sample.mean()
                var_se = math.sqrt(max(np.mean(centered ** 4) - np.mean(centered ** 2) ** 2, 0.0) / n_reps)
                if not _within_se(row.var_mc, row.var_theory, var_se):
                    failures.append(f"{triple} n={n} var {row.var_mc:.3f} vs {row.var_theory:.3f}")
            elif row.var_theory != 0.0:
                failures.append(f"{triple} n={n} deterministic variance {row.var_theory}")
    return CheckResult("edges", not failures, "; ".join(failures) or "all moments within 4 SE")


def check_stationary(seed: int, workers: int) -> CheckResult:
    """Degree histogram of G_14 against the truncated-kernel stationary law."""
    params = Params(0.0, 1.0, 0.2)
    _, g = grow(initial_graph("k2"), params, 14, _key(seed, 0), keep_final=True)
    solution = solve_stationary(params)
    pi = solution.distribution
    D = solution.kernel.D
    empirical = np.bincount(np.minimum(g.degrees, D), minlength=D + 1) / g.num_vertices
    tv = total_variation(empirical, pi)
    mean = float(g.degrees.mean())
    target = 2.0 * params.beta / (1.0 - 2.0 * params.gamma - params.alpha)
    passed = tv <= 0.05 and abs(mean - target) <= 0.05 * target
    return CheckResult("stationary", passed, f"TV={tv:.4f}, mean degree {mean:.4f} vs {target:.4f}")


def check_tail(seed: int, workers: int) -> CheckResult:
    """p* = 2 and a log-log tail slope near -3 at gamma = (sqrt 3 - 1)/2."""
    params = Params(0.0, 1.0, (math.sqrt(3.0) - 1.0) / 2.0)
    p_star = tail_exponent(params)
    solution = solve_stationary(params, max_truncation=2048)
    slope = tail_slope(solution.distribution, 20, 200)
    passed = abs(p_star - 2.0) <= 1e-6 and abs(slope + 3.0) <= 0.5
    return CheckResult("tail", passed, f"p*={p_star:.9f}, slope={slope:.3f}")


def check_collapse(seed: int, workers: int, seeds: int = 10) -> CheckResult:
    """Proportions of degrees 0..5 in G_12 vanish when (1+gamma)(alpha+gamma) > 1."""
    params = Params(0.9, 1.0, 0.8)
    fn = _ProportionTask(params, 12, _key(seed, 0), 5)
    proportions = np.mean(map_replicates(fn, range(seeds), workers=workers), axis=0)
    passed = bool(np.all(proportions < 0.01))
    return CheckResult("collapse", passed, f"mean p_12(d), d=0..5: {np.round(proportions, 5).tolist()}")


@dataclass(frozen=True)
class _ProportionTask:
    params: Params
    steps: int
    key: StreamKey
    d_max: int

    def __call__(self, rep):
        _, g = grow(initial_graph("k1"), self.params, self.steps, replicate_key(self.key, rep), keep_final=True)
        return degree_proportions(g, self.d_max)


def check_isolation(
    seed: int, workers: int, paths: int = 20, extinction_reps: int = 100000
) -> CheckResult:
    """beta = 0: isolation takes over below the criterion and not above it."""
    g0 = initial_graph("k2")
    sub = isolation_curve(g0, Params(0.0, 0.0, 0.2), 12, paths, _key(seed, 0), workers=workers)
    sup = isolation_curve(g0, Params(0.9, 0.0, 0.8), 12, 3, _key(seed, 1), workers=workers)
    extinction = extinction_probability(
        Params(0.9, 0.0, 0.8), 5, 200, extinction_reps, _key(seed, 2), workers=workers
    )
    sub_mean = float(sub.paths[:, -1].mean())
    sup_mean = float(sup.paths[:, -1].mean())
    passed = (
        sub_mean >= 0.95
        and bool(sub.monotone.all())
        and bool(sup.monotone.all())
        and sup_mean <= 0.9
        and extinction.probability <= 0.9
    )
    detail = (
        f"subcritical mean {sub_mean:.4f} monotone={bool(sub.monotone.all())}, "
        f"supercritical mean {sup_mean:.4f}, extinction(x0=5) {extinction.probability:.4f}"
    )
    return CheckResult("isolation", passed, detail)


def check_densification(seed: int, workers: int) -> CheckResult:
    """ILT exponent log 3/log 2, and the sparse and critical normalizations of E_n."""
    g0 = initial_graph("k2")
    v0 = g0.num_vertices
    ilt, _ = grow(g0, Params(0.0, 1.0, 1.0), 10, _key(seed, 0))
    slope = densification_fit(ilt)
    target = math.log(3.0) / math.log(2.0)

    sparse = grow_replicates(g0, Params(0.0, 1.0, 0.2), 14, 3, _key(seed, 1), workers=workers)
    sparse_value = float(np.mean([stats[-1].normalized_edges_sparse for stats in sparse]))
    sparse_target = v0 * 1.0 / (1.0 - 2.0 * 0.2)

    critical = grow_replicates(g0, Params(0.0, 1.0, 0.5), 14, 5, _key(seed, 2), workers=workers)
    critical_value = float(np.mean([stats[-1].normalized_edges_critical for stats in critical]))
    critical_target = v0 * 1.0 / 2.0

    passed = (
        abs(slope - target) <= 0.05
        and abs(sparse_value - sparse_target) <= 0.10 * sparse_target
        and abs(critical_value - critical_target) <= 0.15 * critical_target
    )
    detail = (
        f"ILT slope {slope:.4f} vs {target:.4f}, sparse {sparse_value:.4f} vs {sparse_target:.4f}, "
        f"critical {critical_value:.4f} vs {critical_target:.4f}"
    )
    return CheckResult("densification", passed, detail)


@dataclass(frozen=True)
class _MartingaleTask:
    g: object
    params: Params
    key: StreamKey

    def __call__(self, rep):
        nxt = evolve(self.g, self.params, replicate_key(self.key, rep))
        return martingale_W(generation_stats(nxt), self.params)


def check_martingale(seed: int, workers: int, reps: int = 10000) -> CheckResult:
    """E[W_6 | G_5] = W_5 over one-step evolutions of a fixed G_5."""
    params = Params(0.5, 0.5, 0.5)
    _, g5 = grow(initial_graph("k2"), params, 5, _key(seed, 0), keep_final=True)
    w5 = martingale_W(generation_stats(g5), params)
    w6 = np.array(map_replicates(_MartingaleTask(g5, params, _key(seed, 1)), range(reps), workers=workers))
    se = w6.std(ddof=1) / math.sqrt(reps)
    return CheckResult(
        "martingale", _within_se(w6.mean(), w5, se), f"mean W_6 {w6.mean():.5f} vs W_5 {w5:.5f} (SE {se:.5f})"
    )


def check_coupling(seed: int, workers: int, reps: int = 100000) -> CheckResult:
    """One coupled step contracts |x - x_hat| = 30 by (1 + 2 gamma + alpha)/2 on average."""
    failures = []
    details = []
    for i, triple in enumerate([(0.3, 1.0, 0.2), (0.0, 1.0, 0.2), (0.9, 1.0, 0.8)]):
        params = Params(*triple)
        result = coupled_distance(40, 10, params, reps, _key(seed, i))
        details.append(f"{triple}: {result.mean:.4f} vs {result.expected:.4f}")
        if not _within_se(result.mean, result.expected, result.standard_error):
            failures.append(str(triple))
    return CheckResult("coupling", not failures, "; ".join(details))


@dataclass(frozen=True)
class _SpectralTask:
    params: Params
    steps: int
    key: StreamKey

    def __call__(self, rep):
        g0 = initial_graph("k2")
        graphs = iterate_graphs(g0, self.params, self.steps, replicate_key(self.key, rep))
        return [spectral_report(g) for g in graphs]


def check_spectral(seed: int, workers: int, seeds: int = 20) -> CheckResult:
    """lambda_1 shrinks in the sparse regime, stays below 1 in the dense one, and Cheeger holds."""
    sparse = map_replicates(_SpectralTask(Params(0.0, 1.0, 0.2), 8, _key(seed, 0)), range(seeds), workers=workers)
    dense = map_replicates(_SpectralTask(Params(0.9, 1.0, 0.8), 9, _key(seed, 1)), range(seeds), workers=workers)
    median_3 = float(np.median([reports[3].lambda_1 for reports in sparse]))
    median_8 = float(np.median([reports[8].lambda_1 for reports in sparse]))
    dense_max = max(r.lambda_1 for reports in dense for r in reports[3:])
    cheeger_ok = all(
        r.cheeger_exact ** 2 / 2.0 <= r.lambda_1 + 1e-9 and r.lambda_1 <= 2.0 * r.cheeger_exact + 1e-9
        for reports in sparse + dense
        for r in reports
        if r.cheeger_exact is not None
    )
    passed = median_8 < median_3 and dense_max <= 0.999 and cheeger_ok
    detail = (
        f"sparse median lambda_1 G_3 {median_3:.4f} -> G_8 {median_8:.4f}, "
        f"dense max lambda_1 over G_3..G_9 {dense_max:.4f}, Cheeger inequality {cheeger_ok}"
    )
    return CheckResult("spectral", passed, detail)


def check_moment_ratio(seed: int, workers: int, reps: int = 10000) -> CheckResult:
    """Conditional moment ratios at x = 10^4 approach (1+gamma)^p and (alpha+gamma)^p."""
    params = Params(0.2, 1.0, 0.3)
    failures = []
    for i, p in enumerate([-1.0, 0.5, 1.0, 2.0]):
        ratio = conditional_moment_ratio(10000, params, p, reps, _key(seed, i))
        parent = (1.0 + params.gamma) ** p
        child = (params.alpha + params.gamma) ** p
        if abs(ratio.parent - parent) > 0.02 * parent or abs(ratio.child - child) > 0.02 * child:
            failures.append(f"p={p}: {ratio.parent:.4f}/{parent:.4f}, {ratio.child:.4f}/{child:.4f}")
    return CheckResult("moment-ratio", not failures, "; ".join(failures) or "all within 2%")


def check_determinism(seed: int, workers: int) -> CheckResult:
    """grow writes byte-identical csv for a fixed seed, across runs and worker counts."""
    with tempfile.TemporaryDirectory() as tmp:
        paths = []
        for name, n_workers in [("a", 1), ("b", 1), ("c", max(4, workers))]:
            config = ExperimentConfig.from_sources(
                overrides={
                    "command": "grow",
                    "alpha": 0.3,
                    "beta": 0.5,
                    "gamma": 0.2,
                    "g0": "k2",
                    "steps": 8,
                    "reps": 8,
                    "seed": seed,
                    "workers": n_workers,
                    "out": str(Path(tmp) / f"{name}.csv"),
                }
            )
            Experiment(config).run()
            paths.append(Path(tmp) / f"{name}.csv")
        same = all(filecmp.cmp(paths[0], p, shallow=False) for p in paths[1:])
    return CheckResult("determinism", same, "identical" if same else "csv files differ")


CHECKS: Dict[str, Check] = {
    c.name: c
    for c in [
        Check("edges", "edge-count mean and variance recursions", check_edges),
        Check("stationary", "stationary degree law of G_14", check_stationary),
        Check("tail", "tail exponent and log-log tail slope", check_tail),
        Check("collapse", "vanishing small-degree proportions", check_collapse),
        Check("isolation", "beta = 0 isolation and extinction", check_isolation),
        Check("densification", "edge-count regimes and ILT exponent", check_densification),
        Check("martingale", "one-step martingale property of W_n", check_martingale),
        Check("coupling", "coupled one-step contraction", check_coupling),
        Check("spectral", "spectral gap and Cheeger inequality", check_spectral),
        Check("moment-ratio", "conditional moment ratios at large degree", check_moment_ratio),
        Check("determinism", "byte-identical grow output", check_determinism),
    ]
}


def list_checks() -> List[str]:
    return [f"{c.name}: {c.description}" for c in CHECKS.values()]


def run_acceptance(seed: int, only: List[str] = None, workers: int = 1) -> List[CheckResult]:
    """
    Run the selected checks (all by default) and log one status line each.

    :raises ValueError: for an unknown check name.
    """
    names = list(only) if only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"Unknown checks {unknown}; available: {list(CHECKS)}.")
    results = []
    for name in names:
        since = time.time()
        result = CHECKS[name].fn(seed, workers)
        result.seconds = time.time() - since
        status = "PASS" if result.passed else "FAIL"
        logger.info(f"[{status}] {name} ({timer(result.seconds)}): {result.detail}")
        results.append(result)
    return results
