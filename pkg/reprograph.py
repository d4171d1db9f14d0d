"""
The randomised reproducing graph: one snapshot G_n and the step G_n -> G_{n+1}.

Vertex convention: vertex i of G_n continues as vertex i of G_{n+1} and its
child is vertex i + V_n, so the ancestor of vertex j of G_{n+1} is j mod V_n.
Every edge trial is keyed by (generation, rule tag) and counted by the entity
it belongs to, so exactly one random variable is drawn per vertex, ordered
pair or unordered pair.
"""

# pylint: disable=invalid-name, too-many-arguments, too-many-locals, logging-fstring-interpolation
import functools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp
from tqdm import tqdm

from edge_stats import martingale_W
from experiment_utils import map_replicates
from sampling import (
    TAG_REPLICATE,
    TAG_RULE_A,
    TAG_RULE_B,
    TAG_RULE_C,
    StreamKey,
    bernoulli_many,
    derive_stream,
)

logger = logging.getLogger("ReproGraph")

DEFAULT_MAX_VERTICES = 2 ** 22
DEFAULT_MAX_EDGES = 2 ** 27

VERTEX_DTYPE = np.int32


class ResourceLimitError(RuntimeError):
    """A growth step would exceed the configured vertex or edge cap."""


@dataclass(frozen=True)
class Params:
    """The edge probabilities (alpha, beta, gamma) of the model."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"Parameter {name} must lie in [0, 1], got {value}.")
            object.__setattr__(self, name, value)

    @property
    def degree_product(self) -> float:
        """(1+gamma)(alpha+gamma): below 1 the degree chain is positive recurrent."""
        return (1.0 + self.gamma) * (self.alpha + self.gamma)

    @property
    def edge_growth(self) -> float:
        """1 + 2 gamma + alpha, the mean number of offspring of an edge."""
        return 1.0 + 2.0 * self.gamma + self.alpha

    @property
    def deterministic(self) -> bool:
        return all(v in (0.0, 1.0) for v in (self.alpha, self.beta, self.gamma))

    def as_dict(self) -> Dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


def _canonical_edges(edges: np.ndarray, num_vertices: int) -> np.ndarray:
    """Orient edges u<v, sort, and reject self loops, duplicates and bad indices."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= num_vertices):
        raise ValueError(f"Edge endpoint out of range for a graph on {num_vertices} vertices.")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise ValueError("Self-loops are not allowed.")
    edges = np.sort(edges, axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    if len(edges) > 1 and np.any(np.all(edges[1:] == edges[:-1], axis=1)):
        raise ValueError("Multi-edges are not allowed.")
    return edges.astype(VERTEX_DTYPE)


class ReproGraph:
    """
    One immutable snapshot G_n.

    Edges are stored once each as rows (u, v) with u < v in lexicographic
    order; the sorted neighbour lists are the rows of the CSR adjacency.
    """

    def __init__(
        self,
        num_vertices: int,
        edges=None,
        generation: int = 0,
        v0: int = None,
        check: bool = True,
    ):
        """
        :param num_vertices: V_n.
        :param edges: array-like of shape (E, 2) of vertex index pairs.
        :param generation: n, the number of growth steps since G_0.
        :param v0: vertex count of G_0, defaults to ``num_vertices`` when n = 0.
        :param check: canonicalize and validate the edge array.  Internal
            callers that already hold canonical edges pass False.
        """
        if num_vertices < 1:
            raise ValueError(f"A graph needs at least one vertex, got {num_vertices}.")
        if generation < 0:
            raise ValueError(f"Generation index must be non-negative, got {generation}.")
        if v0 is None:
            v0 = num_vertices >> generation
        if num_vertices != (2 ** generation) * v0:
            raise ValueError(
                f"V_n must equal 2^n * V_0, got V_n={num_vertices}, n={generation}, V_0={v0}."
            )
        if edges is None:
            edges = np.empty((0, 2), dtype=VERTEX_DTYPE)
        self.num_vertices = int(num_vertices)
        self.n = int(generation)
        self.v0 = int(v0)
        self.edges = (
            _canonical_edges(edges, self.num_vertices)
            if check
            else np.asarray(edges, dtype=VERTEX_DTYPE).reshape(-1, 2)
        )
        self.edges.setflags(write=False)
        self._adjacency = None
        self._degrees = None

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = np.bincount(
                self.edges.ravel(), minlength=self.num_vertices
            ).astype(np.int64)
            self._degrees.setflags(write=False)
        return self._degrees

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency in CSR form (sorted neighbour lists)."""
        if self._adjacency is None:
            u, v = self.edges[:, 0], self.edges[:, 1]
            rows = np.concatenate([u, v])
            cols = np.concatenate([v, u])
            data = np.ones(rows.size, dtype=np.float64)
            adj = sp.csr_matrix(
                (data, (rows, cols)), shape=(self.num_vertices, self.num_vertices)
            )
            adj.sort_indices()
            self._adjacency = adj
        return self._adjacency

    def neighbors(self, i: int) -> np.ndarray:
        adj = self.adjacency
        return adj.indices[adj.indptr[i]:adj.indptr[i + 1]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReproGraph):
            return NotImplemented
        return (
            self.num_vertices == other.num_vertices
            and self.n == other.n
            and np.array_equal(self.edges, other.edges)
        )

    def __repr__(self) -> str:
        return f"ReproGraph(n={self.n}, V={self.num_vertices}, E={self.num_edges})"


@dataclass
class GenerationStats:
    """Per-generation scalars of G_n."""

    n: int
    num_vertices: int
    num_edges: int
    degree_histogram: Dict[int, int] = field(default_factory=dict)
    isolated_fraction: float = 0.0
    normalized_edges_sparse: float = 0.0
    normalized_edges_critical: Optional[float] = None
    martingale_W: Optional[float] = None
    max_degree: int = 0
    mean_degree: float = 0.0

    def as_row(self) -> dict:
        """Flat columns for tables; the histogram is left to JSONL records."""
        row = {k: v for k, v in self.__dict__.items() if k != "degree_histogram"}
        return row


def index_map(i: int, num_vertices: int) -> Tuple[int, int]:
    """(continuation index, child index) in G_{n+1} of vertex i of G_n."""
    if not 0 <= i < num_vertices:
        raise IndexError(f"Vertex {i} out of range for V_n={num_vertices}.")
    return i, i + num_vertices


def ancestor(j: int, num_vertices: int) -> int:
    """The vertex of G_n that vertex j of G_{n+1} descends from."""
    if not 0 <= j < 2 * num_vertices:
        raise IndexError(f"Vertex {j} out of range for V_(n+1)={2 * num_vertices}.")
    return j % num_vertices


def degree_histogram(g: ReproGraph) -> Dict[int, int]:
    counts = np.bincount(g.degrees)
    return {int(d): int(c) for d, c in enumerate(counts) if c}


def edge_count(g: ReproGraph) -> int:
    return g.num_edges


def isolated_fraction(g: ReproGraph) -> float:
    return float(np.count_nonzero(g.degrees == 0)) / g.num_vertices


def degree_proportions(g: ReproGraph, d_max: int) -> np.ndarray:
    """p_n(d) for d = 0..d_max: the proportion of vertices with degree d."""
    counts = np.bincount(g.degrees, minlength=d_max + 1)[: d_max + 1]
    return counts / g.num_vertices


def generation_stats(g: ReproGraph, params: Params = None) -> GenerationStats:
    """Summarize G_n.  The martingale value is filled in when beta > 0."""
    E = edge_count(g)
    stats = GenerationStats(
        n=g.n,
        num_vertices=g.num_vertices,
        num_edges=E,
        degree_histogram=degree_histogram(g),
        isolated_fraction=isolated_fraction(g),
        normalized_edges_sparse=E / 2 ** g.n,
        normalized_edges_critical=E / (2 ** g.n * g.n) if g.n >= 1 else None,
        max_degree=int(g.degrees.max()),
        mean_degree=2.0 * E / g.num_vertices,
    )
    if params is not None and params.beta > 0:
        stats.martingale_W = martingale_W(stats, params)
    return stats


def evolve(
    g: ReproGraph,
    params: Params,
    key: StreamKey,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_edges: int = DEFAULT_MAX_EDGES,
) -> ReproGraph:
    """
    One growth step G_n -> G_{n+1}.

    (a) u1-v1 iff u-v; (b) u0-u1 iff the vertex trial of u succeeds (beta);
    (c) u0-v1 iff u-v and the ordered-pair trial (u, v) succeeds (gamma);
    (d) u0-v0 iff u-v and the unordered-pair trial {u, v} succeeds (alpha).

    :param g: the current graph G_n.
    :param params: edge probabilities.
    :param key: stream key of the run; trials use derive_stream(key, [n, tag]).
    :param max_vertices: cap on V_{n+1}.
    :param max_edges: cap on the projected and the realized E_{n+1}.
    :raises ResourceLimitError: if a cap would be exceeded.
    :return: G_{n+1}.
    """
    V = g.num_vertices
    E = g.num_edges
    if 2 * V > max_vertices:
        raise ResourceLimitError(
            f"Growing generation {g.n} would give {2 * V} vertices, cap is {max_vertices}."
        )
    projected = params.edge_growth * E + params.beta * V
    if projected > max_edges:
        raise ResourceLimitError(
            f"Growing generation {g.n} would give about {projected:.0f} edges, cap is {max_edges}."
        )

    step_key = derive_stream(key, [g.n])
    u = g.edges[:, 0].astype(np.int64)
    v = g.edges[:, 1].astype(np.int64)
    pair_counter = u * V + v  # u < v, so also the canonical unordered-pair counter
    reverse_counter = v * V + u

    # (b) parent-child
    b = bernoulli_many(derive_stream(step_key, [TAG_RULE_B]), np.arange(V), params.beta)
    parents = np.flatnonzero(b)
    rule_b = np.column_stack([parents, parents + V])

    # (c) child u0 to parent's neighbour v1, ordered pair (u, v), and v0 to u1
    key_c = derive_stream(step_key, [TAG_RULE_C])
    c_uv = bernoulli_many(key_c, pair_counter, params.gamma)
    c_vu = bernoulli_many(key_c, reverse_counter, params.gamma)
    rule_c = np.concatenate(
        [
            np.column_stack([v[c_uv], u[c_uv] + V]),
            np.column_stack([u[c_vu], v[c_vu] + V]),
        ]
    )

    # (d) child-child, unordered pair {u, v}
    a = bernoulli_many(derive_stream(step_key, [TAG_RULE_A]), pair_counter, params.alpha)
    rule_d = np.column_stack([u[a] + V, v[a] + V])

    new_edges = np.concatenate([np.column_stack([u, v]), rule_b, rule_c, rule_d])
    if new_edges.shape[0] > max_edges:
        raise ResourceLimitError(
            f"Generation {g.n + 1} has {new_edges.shape[0]} edges, cap is {max_edges}."
        )
    # all rows already have first endpoint < second; only the order needs fixing
    order = np.lexsort((new_edges[:, 1], new_edges[:, 0]))
    return ReproGraph(2 * V, new_edges[order], generation=g.n + 1, v0=g.v0, check=False)


def iterate_graphs(
    g0: ReproGraph,
    params: Params,
    steps: int,
    key: StreamKey,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_edges: int = DEFAULT_MAX_EDGES,
) -> Iterator[ReproGraph]:
    """Yield G_0, G_1, ..., G_steps."""
    if steps < 0:
        raise ValueError(f"Number of steps must be non-negative, got {steps}.")
    g = g0
    yield g
    for _ in range(steps):
        g = evolve(g, params, key, max_vertices=max_vertices, max_edges=max_edges)
        yield g


def grow(
    g0: ReproGraph,
    params: Params,
    steps: int,
    key: StreamKey,
    keep_final: bool = False,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_edges: int = DEFAULT_MAX_EDGES,
    progress: bool = False,
) -> Tuple[List[GenerationStats], Optional[ReproGraph]]:
    """
    Grow ``steps`` generations from ``g0``.

    :return: (stats of G_0..G_steps, G_steps if ``keep_final`` else None)
    """
    stats = []
    g = None
    graphs = iterate_graphs(g0, params, steps, key, max_vertices, max_edges)
    for g in tqdm(graphs, total=steps + 1, desc="grow", disable=not progress):
        stats.append(generation_stats(g, params))
        logger.debug(f"generation {g.n}: V={g.num_vertices} E={g.num_edges}")
    return stats, (g if keep_final else None)


def _grow_replicate(rep, g0, params, steps, key, max_vertices, max_edges):
    stats, _ = grow(
        g0,
        params,
        steps,
        replicate_key(key, rep),
        max_vertices=max_vertices,
        max_edges=max_edges,
    )
    return stats


def grow_replicates(
    g0: ReproGraph,
    params: Params,
    steps: int,
    reps: int,
    key: StreamKey,
    workers: int = 1,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_edges: int = DEFAULT_MAX_EDGES,
    progress: bool = False,
) -> List[List[GenerationStats]]:
    """
    Stats of ``reps`` independent growths from ``g0``, in replicate order.
    Replicate r grows under derive_stream(key, [TAG_REPLICATE, r]).
    """
    if reps < 1:
        raise ValueError(f"Need at least one replicate, got {reps}.")
    fn = functools.partial(
        _grow_replicate,
        g0=g0,
        params=params,
        steps=steps,
        key=key,
        max_vertices=max_vertices,
        max_edges=max_edges,
    )
    return map_replicates(fn, range(reps), workers=workers, progress=progress, desc="replicates")


def replicate_key(key: StreamKey, rep: int) -> StreamKey:
    return derive_stream(key, [TAG_REPLICATE, rep])


_PRESETS = {"k": nx.complete_graph, "p": nx.path_graph, "c": nx.cycle_graph, "e": nx.empty_graph}


def is_preset(source: str) -> bool:
    name = str(source).strip().lower()
    return len(name) > 1 and name[0] in _PRESETS and name[1:].isdigit()


def initial_graph(source: str) -> ReproGraph:
    """
    Build G_0 from a preset name or an edge-list file.

    Presets: ``k1`` (single vertex), ``k<n>`` complete, ``p<n>`` path,
    ``c<n>`` cycle, ``e<n>`` n isolated vertices.  Anything else is read as
    an edge-list path.
    """
    name = str(source).strip().lower()
    builders = _PRESETS
    if is_preset(name):
        size = int(name[1:])
        if size < 1 or (name[0] == "c" and size < 3):
            raise ValueError(f"Invalid G_0 preset {source!r}.")
        return from_networkx(builders[name[0]](size))
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"G_0 {source!r} is neither a preset nor an existing file.")
    return read_edgelist(path)


def from_networkx(graph: nx.Graph) -> ReproGraph:
    """Convert a networkx graph with nodes labelled 0..V-1."""
    nodes = sorted(graph.nodes())
    if nodes != list(range(len(nodes))):
        graph = nx.convert_node_labels_to_integers(graph, ordering="sorted")
    edges = np.array(list(graph.edges()), dtype=np.int64).reshape(-1, 2)
    return ReproGraph(graph.number_of_nodes(), edges)


def to_networkx(g: ReproGraph) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(g.num_vertices))
    graph.add_edges_from(map(tuple, g.edges.tolist()))
    return graph


def export_edgelist(g: ReproGraph, path) -> Path:
    """Write ``u v`` lines (u < v) after a ``# vertices N`` header comment."""
    path = Path(path)
    with open(path, "w", newline="\n") as file:
        file.write(f"# vertices {g.num_vertices}\n")
        for u, v in g.edges.tolist():
            file.write(f"{u} {v}\n")
    return path


def read_edgelist(path) -> ReproGraph:
    """Read an edge list written by :func:`export_edgelist` (or any ``u v`` list)."""
    path = Path(path)
    num_vertices = None
    pairs = []
    with open(path, "r") as file:
        for line in file:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if len(fields) == 2 and fields[0] == "vertices":
                    num_vertices = int(fields[1])
                continue
            u, v = line.split()[:2]
            pairs.append((int(u), int(v)))
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if num_vertices is None:
        num_vertices = int(edges.max()) + 1 if edges.size else 1
    return ReproGraph(num_vertices, edges)


def export_dot(g: ReproGraph, path, name: str = None) -> Path:
    """Write an undirected DOT file with one node statement per vertex."""
    path = Path(path)
    name = name or f"G{g.n}"
    with open(path, "w", newline="\n") as file:
        file.write(f"graph {name} {{\n")
        for i in range(g.num_vertices):
            file.write(f"  {i};\n")
        for u, v in g.edges.tolist():
            file.write(f"  {u} -- {v};\n")
        file.write("}\n")
    return path
