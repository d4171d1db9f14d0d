# pylint: disable=missing-function-docstring, missing-module-docstring, invalid-name
import math

import numpy as np
import pytest

from edge_stats import (
    CRITICAL,
    DENSE,
    SPARSE,
    classify_edge_regime,
    densification_fit,
    edge_moment_table,
    edge_moments,
    expected_edges,
    expected_edges_closed_form,
    martingale_W,
    variance_edges,
)
from reprograph import Params, grow, grow_replicates, initial_graph
from sampling import StreamKey

KEY = StreamKey(77)


@pytest.mark.parametrize(
    "triple",
    [(0.3, 0.5, 0.2), (0.0, 1.0, 0.5), (0.0, 1.0, 1.0), (0.9, 1.0, 0.8), (0.0, 0.0, 0.3)],
)
@pytest.mark.parametrize("e0", [0, 1, 6])
def test_recursion_matches_closed_form(triple, e0):
    params = Params(*triple)
    for n in range(9):
        assert expected_edges(n, params, 3, e0) == pytest.approx(
            expected_edges_closed_form(n, params, 3, e0), rel=1e-9, abs=1e-9
        )


def test_iterated_local_transitivity_mean():
    params = Params(0.0, 1.0, 1.0)
    assert [expected_edges(n, params, 2, 1) for n in range(6)] == [
        3 ** (n + 1) - 2 ** (n + 1) for n in range(6)
    ]


def test_variance_is_zero_for_deterministic_parameters():
    for triple in [(0, 1, 1), (1, 1, 1), (0, 0, 0), (1, 0, 0)]:
        assert variance_edges(7, Params(*triple), 2, 1) == 0.0
    assert variance_edges(3, Params(0.3, 0.5, 0.2), 2, 1) > 0.0


def test_edge_moments_sequence():
    moments = edge_moments(4, Params(0.3, 0.5, 0.2), 2, 1)
    assert [m.n for m in moments] == [0, 1, 2, 3, 4]
    assert moments[0].mean_E == 1.0 and moments[0].var_E == 0.0
    # E_1 = E_0 + Bin(2E_0, gamma) + Bin(E_0, alpha) + Bin(V_0, beta)
    assert moments[1].mean_E == pytest.approx(1 + 0.4 + 0.3 + 1.0)
    assert moments[1].var_E == pytest.approx(2 * 0.2 * 0.8 + 0.3 * 0.7 + 2 * 0.25)
    with pytest.raises(ValueError):
        edge_moments(-1, Params(0, 1, 0), 1, 0)


def test_moments_agree_with_simulation():
    params = Params(0.3, 0.5, 0.2)
    reps, steps = 2000, 4
    replicates = grow_replicates(initial_graph("k2"), params, steps, reps, KEY)
    final = np.array([stats[-1].num_edges for stats in replicates], dtype=np.float64)
    theory = edge_moments(steps, params, 2, 1)[-1]
    se = final.std(ddof=1) / math.sqrt(reps)
    assert abs(final.mean() - theory.mean_E) <= 4 * se
    assert final.var(ddof=1) == pytest.approx(theory.var_E, rel=0.15)


def test_edge_moment_table():
    params = Params(0.3, 0.5, 0.2)
    replicates = grow_replicates(initial_graph("k2"), params, 4, 500, KEY)
    table = edge_moment_table(replicates, params, 2, 1)
    assert list(table.columns) == ["n", "mean_theory", "mean_mc", "var_theory", "var_mc", "reps"]
    assert table["n"].tolist() == [0, 1, 2, 3, 4]
    assert table["reps"].unique().tolist() == [500]
    assert table.loc[0, "mean_mc"] == 1.0
    assert table.loc[0, "var_mc"] == 0.0
    expected = [m.mean_E for m in edge_moments(4, params, 2, 1)]
    assert table["mean_theory"].tolist() == pytest.approx(expected)
    assert edge_moment_table(replicates[:1], params, 2, 1)["var_mc"].isna().all()


def test_classify_edge_regime():
    sparse = classify_edge_regime(Params(0.0, 1.0, 0.2), v0=2)
    assert sparse.regime == SPARSE
    assert sparse.limit == pytest.approx(2 / 0.6)
    critical = classify_edge_regime(Params(0.0, 1.0, 0.5))
    assert critical.regime == CRITICAL
    assert critical.limit == pytest.approx(0.5)
    dense = classify_edge_regime(Params(0.0, 1.0, 1.0))
    assert dense.regime == DENSE
    assert dense.limit is None
    assert dense.exponent == pytest.approx(math.log(3) / math.log(2))


def test_martingale_is_constant_on_deterministic_growth():
    params = Params(0.0, 1.0, 1.0)
    stats, _ = grow(initial_graph("k2"), params, 6, KEY)
    values = [martingale_W(s, params) for s in stats]
    assert values == pytest.approx([3.0] * 7)
    with pytest.raises(ValueError):
        martingale_W(stats[0], Params(0.0, 0.0, 1.0))


def test_densification_fit_on_iterated_local_transitivity():
    stats, _ = grow(initial_graph("k2"), Params(0.0, 1.0, 1.0), 10, KEY)
    assert densification_fit(stats) == pytest.approx(math.log(3) / math.log(2), abs=0.05)


def test_densification_fit_rejects_degenerate_input():
    stats, _ = grow(initial_graph("k2"), Params(0.0, 1.0, 1.0), 2, KEY)
    with pytest.raises(ValueError):
        densification_fit(stats)
    constant, _ = grow(initial_graph("k2"), Params(0.0, 0.0, 0.0), 6, KEY)
    with pytest.raises(ValueError):
        densification_fit(constant)
    with pytest.raises(ValueError):
        densification_fit(constant, window=0.0)
