"""Shared fixtures: hand-checked example series and a brute-force oracle."""

from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from src.algorithms import QueryContext, algorithm_spec
from src.graph_model import EdgeTriple
from src.ingest import DeltaBatch, SnapshotSeries, materialize_snapshots, series_from_snapshots

REPO_ROOT = Path(__file__).parent.parent
DATA_DIR = REPO_ROOT / "data"

ALGORITHMS = ("bfs", "sssp", "sswp", "ssnp", "viterbi")


def brute_force_values(edges, num_vertices: int, q: QueryContext) -> np.ndarray:
    """Best fold of the edge function over every simple path from the source."""
    spec = q.spec
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(range(num_vertices))
    for src, dst, weight in edges:
        if src != dst:
            graph.add_edge(src, dst, weight=weight)

    values = np.full(num_vertices, spec.init_other, dtype=np.float64)
    values[q.source] = spec.init_source
    for target in range(num_vertices):
        if target == q.source:
            continue
        for path in nx.all_simple_edge_paths(graph, q.source, target):
            value = np.float64(spec.init_source)
            for u, v, key in path:
                value = spec.edge_function(value, np.float64(graph.edges[u, v, key]['weight']))
            if spec.better(value, values[target]):
                values[target] = value
    return values


def oracle_results(series: SnapshotSeries, q: QueryContext):
    return [brute_force_values(edges, series.num_vertices, q) for edges in series.edge_sets]


@pytest.fixture
def oracle():
    return oracle_results


@pytest.fixture
def canonical_series() -> SnapshotSeries:
    """Two snapshots; sssp from 0 gives [0,1,2,5] then [0,1,2,3]."""
    base = [EdgeTriple(0, 1, 1.0), EdgeTriple(1, 2, 1.0), EdgeTriple(0, 3, 5.0)]
    delta = DeltaBatch(additions=(EdgeTriple(2, 3, 1.0),), deletions=(EdgeTriple(0, 3, 5.0),))
    return materialize_snapshots(base, [delta], num_vertices=4)


@pytest.fixture
def witness_series() -> SnapshotSeries:
    """Vertex 2 is 10 in both snapshots while its bounds are 9 and 11."""
    common = {EdgeTriple(0, 2, 11.0)}
    first = common | {EdgeTriple(0, 1, 1.0), EdgeTriple(1, 2, 9.0)}
    second = common | {EdgeTriple(0, 1, 2.0), EdgeTriple(1, 2, 8.0)}
    return series_from_snapshots([first, second], num_vertices=3)


@pytest.fixture
def sssp_from_zero() -> QueryContext:
    return QueryContext(algorithm_spec("sssp"), 0)


@pytest.fixture
def canonical_manifest() -> Path:
    return DATA_DIR / "canonical" / "manifest.json"


@pytest.fixture
def witness_manifest() -> Path:
    return DATA_DIR / "incompleteness" / "manifest.json"
