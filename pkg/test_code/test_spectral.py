# pylint: disable=missing-function-docstring, missing-module-docstring, invalid-name
import itertools

import networkx as nx
import numpy as np
import pytest

import spectral
from reprograph import Params, ReproGraph, from_networkx, initial_graph, iterate_graphs, to_networkx
from sampling import StreamKey
from spectral import (
    MAX_EXACT_CHEEGER_VERTICES,
    cheeger_exact,
    cheeger_sweep,
    component_count,
    eigenvalues,
    fiedler_vector,
    normalized_laplacian,
    spectral_report,
    zero_multiplicity,
)

KEY = StreamKey(31)


def _brute_force_cheeger(g: ReproGraph) -> float:
    graph = to_networkx(g)
    nodes = list(graph.nodes())
    best = np.inf
    for size in range(1, len(nodes)):
        for side in itertools.combinations(nodes, size):
            best = min(best, nx.conductance(graph, side))
    return best


def test_laplacian_matches_networkx():
    g = list(iterate_graphs(initial_graph("c5"), Params(0.3, 0.5, 0.4), 3, KEY))[-1]
    expected = nx.normalized_laplacian_matrix(to_networkx(g)).toarray()
    assert np.allclose(normalized_laplacian(g), expected)


def test_isolated_vertices_get_zero_diagonal():
    L = normalized_laplacian(ReproGraph(3, [(0, 1)]))
    assert L[2, 2] == 0.0
    assert L[0, 0] == 1.0


def test_known_spectra():
    assert np.allclose(eigenvalues(normalized_laplacian(initial_graph("c4"))), [0, 1, 1, 2])
    k2 = spectral_report(initial_graph("k2"))
    assert k2.lambda_1 == pytest.approx(2.0)
    assert k2.spectral_radius == pytest.approx(1.0)
    assert k2.cheeger_exact == pytest.approx(1.0)


def test_eigenvalues_rejects_non_symmetric():
    with pytest.raises(ValueError):
        eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        eigenvalues(np.zeros((2, 3)))


def test_cheeger_exact_known_values():
    assert cheeger_exact(initial_graph("p4"))[0] == pytest.approx(1 / 3)
    assert cheeger_exact(initial_graph("c4"))[0] == pytest.approx(0.5)
    h, side = cheeger_exact(initial_graph("k4"))
    assert h == pytest.approx(2 / 3)
    assert len(side) == 2


def test_cheeger_exact_matches_brute_force():
    graph = nx.gnp_random_graph(9, 0.45, seed=3)
    while not nx.is_connected(graph):
        graph.add_edge(*next(nx.non_edges(graph)))
    g = from_networkx(graph)
    h, side = cheeger_exact(g)
    assert h == pytest.approx(_brute_force_cheeger(g))
    assert nx.conductance(graph, side) == pytest.approx(h)


def test_cheeger_exact_limits():
    h, side = cheeger_exact(ReproGraph(4, [(0, 1), (2, 3)]))
    assert h == 0.0
    assert side == [0, 1]
    with pytest.raises(ValueError):
        cheeger_exact(initial_graph(f"c{MAX_EXACT_CHEEGER_VERTICES + 1}"))
    with pytest.raises(ValueError):
        cheeger_exact(initial_graph("k1"))


def test_sweep_bounds():
    assert cheeger_sweep(initial_graph("c8")) == pytest.approx(0.25)
    assert cheeger_sweep(initial_graph("k4")) == pytest.approx(2 / 3)
    assert cheeger_sweep(ReproGraph(4, [(0, 1), (2, 3)])) == 0.0
    for g in iterate_graphs(initial_graph("k2"), Params(0.2, 1.0, 0.3), 3, KEY):
        assert cheeger_sweep(g) >= cheeger_exact(g)[0] - 1e-12


def test_cheeger_inequality_on_grown_graphs():
    for g in iterate_graphs(initial_graph("k2"), Params(0.3, 1.0, 0.4), 3, KEY):
        report = spectral_report(g)
        h = report.cheeger_exact
        assert h ** 2 / 2 <= report.lambda_1 + 1e-9
        assert report.lambda_1 <= 2 * h + 1e-9
        assert 0.0 <= report.lambda_1 <= report.lambda_max <= 2.0 + 1e-9


def test_report_counts_components_once(monkeypatch):
    calls = []

    def counting(g):
        calls.append(g.n)
        return component_count(g)

    monkeypatch.setattr(spectral, "component_count", counting)
    g = list(iterate_graphs(initial_graph("c6"), Params(0.3, 1.0, 0.4), 2, KEY))[-1]
    report = spectral_report(g)
    assert len(calls) == 1
    assert report.cheeger_sweep_upper == pytest.approx(cheeger_sweep(g))


def test_disconnected_graph_report():
    g = ReproGraph(4, [(0, 1), (2, 3)])
    report = spectral_report(g)
    assert report.lambda_1 == pytest.approx(0.0, abs=1e-9)
    assert report.components == 2
    assert component_count(g) == 2
    assert zero_multiplicity(eigenvalues(normalized_laplacian(g))) == 2
    assert report.cheeger_sweep_upper == 0.0
    assert set(report.as_row()) >= {"cheeger_sweep", "lambda_1", "cheeger_exact"}


def test_fiedler_vector():
    value, vector = fiedler_vector(initial_graph("p4"))
    L = normalized_laplacian(initial_graph("p4"))
    assert np.allclose(L @ vector, value * vector)
    with pytest.raises(ValueError):
        fiedler_vector(initial_graph("k1"))


def test_size_caps():
    with pytest.raises(ValueError):
        normalized_laplacian(initial_graph("e5000"))
    with pytest.raises(ValueError):
        spectral_report(initial_graph("k1"))
