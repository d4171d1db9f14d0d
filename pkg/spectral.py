"""
Normalized-Laplacian spectrum of a snapshot and the Cheeger constant,
exhaustively for small graphs and as a Fiedler-vector sweep bound otherwise.
"""

# pylint: disable=invalid-name, logging-fstring-interpolation
import logging
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la
from scipy.sparse.csgraph import connected_components

from experiment_utils import ConvergenceError
from reprograph import ReproGraph

logger = logging.getLogger("Spectral")

MAX_DENSE_VERTICES = 4096
MAX_EXACT_CHEEGER_VERTICES = 22
ZERO_TOL = 1e-8
_CHUNK = 1 << 16


@dataclass
class SpectralReport:
    """
    Spectral summary of G_n.  ``cheeger_exact`` is only filled in for graphs
    small enough for the exhaustive search.
    """

    n: int
    num_vertices: int
    lambda_1: float
    lambda_max: float
    spectral_radius: float
    cheeger_sweep_upper: float
    cheeger_exact: Optional[float] = None
    components: int = 1

    def as_row(self) -> dict:
        row = asdict(self)
        row["cheeger_sweep"] = row.pop("cheeger_sweep_upper")
        return row


def _check_size(g: ReproGraph):
    if g.num_vertices > MAX_DENSE_VERTICES:
        raise ValueError(
            f"Spectral analysis is dense and capped at {MAX_DENSE_VERTICES} vertices, "
            f"graph has {g.num_vertices}."
        )


def normalized_laplacian(g: ReproGraph) -> np.ndarray:
    """I - D^{-1/2} A D^{-1/2}, with a zero diagonal entry for isolated vertices."""
    _check_size(g)
    degrees = g.degrees.astype(np.float64)
    inv_sqrt = np.zeros_like(degrees)
    nonzero = degrees > 0
    inv_sqrt[nonzero] = 1.0 / np.sqrt(degrees[nonzero])
    A = g.adjacency.toarray()
    return np.diag(nonzero.astype(np.float64)) - inv_sqrt[:, None] * A * inv_sqrt[None, :]


def eigenvalues(L: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix."""
    return _eigh(L, vectors=False)


def _eigh(L: np.ndarray, vectors: bool):
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {L.shape}.")
    if not np.allclose(L, L.T, atol=1e-12):
        raise ValueError("Matrix is not symmetric.")
    try:
        if vectors:
            return la.eigh(L)
        return la.eigh(L, eigvals_only=True)
    except la.LinAlgError as e:
        raise ConvergenceError(f"Symmetric eigensolver did not converge: {e}") from e


def zero_multiplicity(eigs, tol: float = ZERO_TOL) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(eigs)) <= tol))


def component_count(g: ReproGraph) -> int:
    count, _ = connected_components(g.adjacency, directed=False)
    return int(count)


def fiedler_vector(g: ReproGraph) -> Tuple[float, np.ndarray]:
    """(lambda_1, its eigenvector) of the normalized Laplacian."""
    if g.num_vertices < 2:
        raise ValueError("The Fiedler vector needs at least two vertices.")
    values, vectors = _eigh(normalized_laplacian(g), vectors=True)
    return float(values[1]), vectors[:, 1]


def cheeger_exact(g: ReproGraph) -> Tuple[float, List[int]]:
    """
    Exhaustive Cheeger constant min e(S, S^c) / vol(S) over S with
    vol(S) <= vol(V)/2, and one S achieving it.

    Each cut is visited once, as the side not containing the last vertex.
    A disconnected graph gives (0, one component).
    """
    V = g.num_vertices
    if V > MAX_EXACT_CHEEGER_VERTICES:
        raise ValueError(
            f"Exhaustive Cheeger search is capped at {MAX_EXACT_CHEEGER_VERTICES} vertices, "
            f"graph has {V}."
        )
    if V < 2:
        raise ValueError("A Cheeger constant needs at least two vertices.")
    count, labels = connected_components(g.adjacency, directed=False)
    if count > 1:
        logger.warning(f"Graph has {count} components, Cheeger constant is 0.")
        return 0.0, np.flatnonzero(labels == labels[0]).tolist()

    degrees = g.degrees.astype(np.int64)
    total = int(degrees.sum())
    u = g.edges[:, 0].astype(np.int64)
    v = g.edges[:, 1].astype(np.int64)
    best, best_mask = np.inf, 0
    num_masks = 1 << (V - 1)
    for start in range(1, num_masks, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, num_masks), dtype=np.int64)
        vol = np.zeros(masks.size, dtype=np.int64)
        for i in range(V - 1):
            vol += degrees[i] * ((masks >> i) & 1)
        cut = np.zeros(masks.size, dtype=np.int64)
        for a, b in zip(u, v):
            cut += ((masks >> a) ^ (masks >> b)) & 1
        ratio = cut / np.minimum(vol, total - vol)
        k = int(np.argmin(ratio))
        if ratio[k] < best:
            best, best_mask = float(ratio[k]), int(masks[k])
    side = [i for i in range(V) if (best_mask >> i) & 1]
    if 2 * int(degrees[side].sum()) > total:
        side = [i for i in range(V) if not (best_mask >> i) & 1]
    return best, side


def cheeger_sweep(g: ReproGraph, fiedler: np.ndarray = None) -> float:
    """
    Upper bound on the Cheeger constant from the best prefix cut of the
    vertices ordered by D^{-1/2} times the Fiedler vector.
    """
    if g.num_vertices < 2:
        raise ValueError("A sweep cut needs at least two vertices.")
    if component_count(g) > 1:
        return 0.0
    if fiedler is None:
        _, fiedler = fiedler_vector(g)
    return _sweep(g, fiedler)


def _sweep(g: ReproGraph, fiedler: np.ndarray) -> float:
    degrees = g.degrees.astype(np.float64)
    order = np.argsort(np.asarray(fiedler) / np.sqrt(degrees), kind="stable")
    position = np.empty(g.num_vertices, dtype=np.int64)
    position[order] = np.arange(g.num_vertices)

    # an edge is cut by every prefix of size k with min position < k <= max position
    pu = position[g.edges[:, 0]]
    pv = position[g.edges[:, 1]]
    diff = np.zeros(g.num_vertices + 1, dtype=np.int64)
    np.add.at(diff, np.minimum(pu, pv) + 1, 1)
    np.add.at(diff, np.maximum(pu, pv) + 1, -1)
    cut = np.cumsum(diff)[1: g.num_vertices]

    vol = np.cumsum(degrees[order])[:-1]
    denom = np.minimum(vol, degrees.sum() - vol)
    return float(np.min(cut / denom))


def spectral_report(g: ReproGraph) -> SpectralReport:
    """Eigenvalue and Cheeger summary of one snapshot."""
    if g.num_vertices < 2:
        raise ValueError("Spectral analysis needs at least two vertices.")
    values, vectors = _eigh(normalized_laplacian(g), vectors=True)
    lambda_1 = float(values[1])
    lambda_max = float(values[-1])
    zeros = zero_multiplicity(values)
    components = component_count(g)
    if zeros != components:
        logger.warning(
            f"Zero eigenvalue multiplicity {zeros} differs from the component count "
            f"{components} of G_{g.n}."
        )
    exact = None
    if g.num_vertices <= MAX_EXACT_CHEEGER_VERTICES:
        exact, _ = cheeger_exact(g)
    return SpectralReport(
        n=g.n,
        num_vertices=g.num_vertices,
        lambda_1=lambda_1,
        lambda_max=lambda_max,
        spectral_radius=max(abs(lambda_1 - 1.0), abs(lambda_max - 1.0)),
        cheeger_sweep_upper=0.0 if components > 1 else _sweep(g, vectors[:, 1]),
        cheeger_exact=exact,
        components=components,
    )
