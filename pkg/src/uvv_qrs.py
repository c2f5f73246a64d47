"""Intersection-union bounds, unchanged-vertex detection and graph reduction.

Solving the query on the intersection graph and on the union graph brackets
every snapshot's value of every vertex. Where the two agree the value is the
same in all snapshots, so the in-edges of that vertex can be dropped from the
intersection graph and from every addition batch before any per-snapshot work.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.algorithms import Direction, QueryContext, evaluate_full
from src.config import EngineConfig
from src.exceptions import PreconditionError
from src.frontier import FrontierStats
from src.graph_model import Graph, ValueArray, graph_from_arrays
from src.incremental import IncrementalSeed, evaluate_incremental_additions
from src.ingest import AdditionBatch, SnapshotSeries, build_addition_batches, build_intersection, build_union

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundsPair:
    """Lower and upper bounds on every snapshot's value per vertex.

    For minimizing algorithms the union graph gives the lower bound and the
    intersection graph the upper bound; for maximizing ones it is reversed.
    """
    lower: ValueArray
    upper: ValueArray
    r_intersection: ValueArray
    r_union: ValueArray
    direction: Direction

    @property
    def mapping(self) -> Dict[str, str]:
        if self.direction is Direction.MINIMIZE:
            return {"lower": "union", "upper": "intersection"}
        return {"lower": "intersection", "upper": "union"}


@dataclass(frozen=True)
class UvvSet:
    """Vertices whose value provably does not change across snapshots."""
    membership: np.ndarray

    @property
    def count(self) -> int:
        return int(self.membership.sum())

    def vertices(self) -> List[int]:
        return np.flatnonzero(self.membership).tolist()

    def __contains__(self, vertex: int) -> bool:
        return bool(self.membership[vertex])

    def __len__(self) -> int:
        return self.count


@dataclass
class QrsStats:
    """Sizes and timings of the reduction."""
    num_vertices: int
    intersection_edges: int = 0
    union_edges: int = 0
    qrs_edges: int = 0
    uvv_count: int = 0
    batch_sizes: List[int] = field(default_factory=list)
    reduced_batch_sizes: List[int] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    bound_stats: FrontierStats = field(default_factory=FrontierStats)

    @property
    def removed_intersection_edges(self) -> int:
        return self.intersection_edges - self.qrs_edges

    @property
    def removed_batch_edges(self) -> int:
        return sum(self.batch_sizes) - sum(self.reduced_batch_sizes)

    @property
    def uvv_fraction(self) -> float:
        return self.uvv_count / self.num_vertices if self.num_vertices else 1.0

    @property
    def qrs_edge_fraction(self) -> float:
        return self.qrs_edges / self.intersection_edges if self.intersection_edges else 0.0

    @property
    def generation_seconds(self) -> float:
        return sum(self.timings.values())


@dataclass(frozen=True)
class QrsBundle:
    """Reduced graph, bootstrap values and reduced batches for one query."""
    qrs: Graph
    bootstrap: ValueArray
    reduced_batches: List[AdditionBatch]
    uvv: UvvSet
    stats: QrsStats
    bounds: BoundsPair
    batches: List[AdditionBatch]
    intersection: Graph


def compute_bounds(
    g_intersection: Graph,
    g_union: Graph,
    q: QueryContext,
    union_from_scratch: bool = False,
    threads: int = 1,
    stats: Optional[FrontierStats] = None,
) -> BoundsPair:
    """Solve the query on the intersection and union graphs.

    The union result is obtained incrementally from the intersection result
    by adding the missing edges, unless ``union_from_scratch`` is set.

    Raises:
        PreconditionError: If the intersection is not contained in the union
    """
    if g_intersection.num_vertices != g_union.num_vertices:
        raise PreconditionError("intersection and union graphs differ in vertex count")
    intersection_set = g_intersection.edge_set()
    union_set = g_union.edge_set()
    if not intersection_set <= union_set:
        raise PreconditionError(
            f"{len(intersection_set - union_set)} intersection edge(s) are missing from the union graph"
        )

    r_intersection = evaluate_full(g_intersection, q, threads, stats)
    if union_from_scratch:
        r_union = evaluate_full(g_union, q, threads, stats)
    else:
        missing = tuple(sorted(union_set - intersection_set))
        r_union = evaluate_incremental_additions(
            g_intersection, IncrementalSeed(r_intersection, missing), q, threads, stats
        )

    if q.spec.direction is Direction.MINIMIZE:
        lower, upper = r_union, r_intersection
    else:
        lower, upper = r_intersection, r_union
    return BoundsPair(lower, upper, r_intersection, r_union, q.spec.direction)


def detect_uvv(bounds: BoundsPair) -> UvvSet:
    """Vertices whose intersection and union values are exactly equal."""
    return UvvSet(np.equal(bounds.r_intersection, bounds.r_union))


def reduce_intersection(g_intersection: Graph, uvv: UvvSet) -> Graph:
    """Drop every edge whose destination is an unchanged vertex.

    Built by collecting the in-edges of the remaining vertices into a new
    structure; matches usually far outnumber mismatches.
    """
    keep = ~uvv.membership[g_intersection.targets]
    return graph_from_arrays(
        g_intersection.num_vertices,
        g_intersection.sources()[keep],
        g_intersection.targets[keep],
        g_intersection.weights[keep],
    )


def reduce_batches(batches: Sequence[AdditionBatch], uvv: UvvSet) -> List[AdditionBatch]:
    """Remove edges into unchanged vertices from each batch, keeping order."""
    membership = uvv.membership
    return [
        AdditionBatch(batch.snapshot, tuple(t for t in batch.triples if not membership[t.dst]))
        for batch in batches
    ]


def qrs_pipeline(
    series: SnapshotSeries,
    q: QueryContext,
    config: Optional[EngineConfig] = None,
    threads: int = 1,
) -> QrsBundle:
    """Build the query-relevant subgraph for a snapshot series.

    Args:
        series: Snapshots to evaluate
        q: Query
        config: Engine configuration (``union_from_scratch``)
        threads: Worker threads for the bound evaluations

    Returns:
        QrsBundle with the reduced graph, R∩ as bootstrap values and the
        reduced batches
    """
    config = config or EngineConfig()
    stats = QrsStats(num_vertices=series.num_vertices)

    started = time.perf_counter()
    g_intersection = build_intersection(series)
    batches = build_addition_batches(series, g_intersection)
    stats.timings['intersection_build'] = time.perf_counter() - started

    started = time.perf_counter()
    g_union = build_union(series)
    stats.timings['union_build'] = time.perf_counter() - started

    started = time.perf_counter()
    bounds = compute_bounds(g_intersection, g_union, q, config.union_from_scratch, threads, stats.bound_stats)
    stats.timings['bounds'] = time.perf_counter() - started

    started = time.perf_counter()
    uvv = detect_uvv(bounds)
    qrs = reduce_intersection(g_intersection, uvv)
    reduced = reduce_batches(batches, uvv)
    stats.timings['reduction'] = time.perf_counter() - started

    stats.intersection_edges = g_intersection.edge_count
    stats.union_edges = g_union.edge_count
    stats.qrs_edges = qrs.edge_count
    stats.uvv_count = uvv.count
    stats.batch_sizes = [len(b) for b in batches]
    stats.reduced_batch_sizes = [len(b) for b in reduced]

    logger.info(
        f"QRS for {q}: {uvv.count}/{series.num_vertices} unchanged vertices, "
        f"{qrs.edge_count}/{g_intersection.edge_count} intersection edges kept, "
        f"{sum(stats.reduced_batch_sizes)}/{sum(stats.batch_sizes)} batch edges kept"
    )
    for batch, reduced_batch in zip(batches, reduced):
        logger.debug(f"Batch {batch.snapshot}: {len(batch)} -> {len(reduced_batch)} edges")

    return QrsBundle(qrs, bounds.r_intersection, reduced, uvv, stats, bounds, batches, g_intersection)
