"""Evaluate one query over a snapshot series in any of the four modes.

Modes:
    full        evaluate every snapshot from scratch
    direct-hop  evaluate the intersection graph, then add each snapshot's batch
    qrs         reduce to the query-relevant subgraph, then add each reduced
                batch one snapshot at a time
    cqrs        reduce, then evaluate all snapshots concurrently over the
                versioned graph
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.algorithms import AlgorithmSpec, QueryContext, algorithm_spec, evaluate_full
from src.concurrent_evaluator import MultiResult, evaluate_concurrent
from src.config import EngineConfig
from src.exceptions import ConfigurationError, SnapshotRangeError
from src.frontier import FrontierStats
from src.graph_model import ValueArray, build_versioned_graph, triples_to_arrays
from src.incremental import direct_hop_all
from src.ingest import SnapshotSeries, build_addition_batches, build_intersection, union_edges
from src.uvv_qrs import QrsBundle, QrsStats, qrs_pipeline

logger = logging.getLogger(__name__)

MODES = ("full", "direct-hop", "qrs", "cqrs")


@dataclass
class Divergence:
    """First cell where two sets of results differ."""
    snapshot: int
    vertex: int
    got: float
    want: float


@dataclass
class QueryOutcome:
    """Results and measurements of one query run."""
    mode: str
    query: QueryContext
    snapshot_indices: List[int]
    results: List[ValueArray]
    timings: Dict[str, float] = field(default_factory=dict)
    edge_evaluations: int = 0
    qrs_stats: Optional[QrsStats] = None
    concurrent: Optional[MultiResult] = None
    snapshot_stats: List[FrontierStats] = field(default_factory=list)

    @property
    def wall_seconds(self) -> float:
        return self.timings.get('total', 0.0)


def find_divergence(got: Sequence[ValueArray], want: Sequence[ValueArray]) -> Optional[Divergence]:
    """Locate the first (snapshot, vertex) where two result lists differ exactly."""
    if len(got) != len(want):
        raise ConfigurationError(f"comparing {len(got)} result arrays with {len(want)}")
    for i, (a, b) in enumerate(zip(got, want)):
        if a.shape != b.shape:
            raise ConfigurationError(f"snapshot {i}: result lengths {a.shape} and {b.shape} differ")
        mismatch = np.flatnonzero(a != b)
        if mismatch.size:
            v = int(mismatch[0])
            return Divergence(i, v, float(a[v]), float(b[v]))
    return None


class EvolvingQueryEngine:
    """Runs queries over one snapshot series."""

    def __init__(self, series: SnapshotSeries, config: Optional[EngineConfig] = None, threads: int = 1):
        """Initialize the engine.

        Args:
            series: Snapshots to query
            config: Engine configuration
            threads: Worker threads for the evaluation engines
        """
        self.series = series
        self.config = config or EngineConfig()
        if len(series) > self.config.mask_capacity:
            logger.warning(
                f"{len(series)} snapshots exceed the mask capacity; the cqrs mode will refuse this series"
            )
        self.threads = max(1, threads)
        self._all_weights: Optional[np.ndarray] = None

    def _weights(self) -> np.ndarray:
        if self._all_weights is None:
            self._all_weights = triples_to_arrays(union_edges(self.series))[2]
        return self._all_weights

    def query(self, algorithm: str, source: int) -> QueryContext:
        """Build a query context, checking the dataset's weights.

        Raises:
            ConfigurationError: Unknown algorithm
            SnapshotRangeError: Source outside the vertex universe
            DomainError: A weight outside the algorithm's domain
        """
        spec: AlgorithmSpec = algorithm_spec(algorithm)
        if not 0 <= source < self.series.num_vertices:
            raise SnapshotRangeError(f"source vertex {source} outside 0..{self.series.num_vertices - 1}")
        spec.check_weights(self._weights())
        return QueryContext(spec, source)

    def run(self, mode: str, q: QueryContext) -> QueryOutcome:
        """Evaluate ``q`` on every snapshot with the given mode."""
        runners = {
            "full": self._run_full,
            "direct-hop": self._run_direct_hop,
            "qrs": self._run_qrs,
            "cqrs": self._run_cqrs,
        }
        if mode not in runners:
            raise ConfigurationError(f"unknown mode '{mode}' (expected one of: {', '.join(MODES)})")

        started = time.perf_counter()
        outcome = runners[mode](q)
        outcome.timings['total'] = time.perf_counter() - started
        logger.info(
            f"{mode} {q}: {len(outcome.results)} snapshots in {outcome.timings['total']:.3f}s, "
            f"{outcome.edge_evaluations} edge evaluations"
        )
        return outcome

    def _outcome(self, mode: str, q: QueryContext, results: List[ValueArray]) -> QueryOutcome:
        return QueryOutcome(mode, q, self.series.snapshot_indices, results)

    def _run_full(self, q: QueryContext) -> QueryOutcome:
        results, stats = [], []
        started = time.perf_counter()
        for i in range(len(self.series)):
            snapshot_stats = FrontierStats()
            results.append(evaluate_full(self.series.graph(i), q, self.threads, snapshot_stats))
            stats.append(snapshot_stats)
        outcome = self._outcome("full", q, results)
        outcome.timings['evaluation'] = time.perf_counter() - started
        outcome.snapshot_stats = stats
        outcome.edge_evaluations = sum(s.edge_evaluations for s in stats)
        return outcome

    def _run_direct_hop(self, q: QueryContext) -> QueryOutcome:
        started = time.perf_counter()
        g_intersection = build_intersection(self.series)
        batches = build_addition_batches(self.series, g_intersection)
        r_intersection = evaluate_full(g_intersection, q, self.threads)
        preparation = time.perf_counter() - started

        started = time.perf_counter()
        stats: List[FrontierStats] = []
        results = direct_hop_all(
            g_intersection, r_intersection, batches, q, self.threads, len(self.series), stats
        )
        outcome = self._outcome("direct-hop", q, results)
        outcome.timings['intersection'] = preparation
        outcome.timings['evaluation'] = time.perf_counter() - started
        outcome.snapshot_stats = stats
        outcome.edge_evaluations = sum(s.edge_evaluations for s in stats)
        return outcome

    def build_qrs(self, q: QueryContext) -> QrsBundle:
        return qrs_pipeline(self.series, q, self.config, self.threads)

    def _run_qrs(self, q: QueryContext) -> QueryOutcome:
        bundle = self.build_qrs(q)
        started = time.perf_counter()
        stats: List[FrontierStats] = []
        # One snapshot after another over the reduced graph
        results = direct_hop_all(
            bundle.qrs, bundle.bootstrap, bundle.reduced_batches, q, 1, len(self.series), stats
        )
        outcome = self._outcome("qrs", q, results)
        outcome.timings.update({f"qrs_{k}": v for k, v in bundle.stats.timings.items()})
        outcome.timings['evaluation'] = time.perf_counter() - started
        outcome.qrs_stats = bundle.stats
        outcome.snapshot_stats = stats
        outcome.edge_evaluations = sum(s.edge_evaluations for s in stats)
        return outcome

    def _run_cqrs(self, q: QueryContext) -> QueryOutcome:
        bundle = self.build_qrs(q)
        started = time.perf_counter()
        vg = build_versioned_graph(bundle.qrs, [b.triples for b in bundle.reduced_batches], self.config.mask_capacity)
        seeds = bundle.batches if self.config.seed_with_unreduced_batches else bundle.reduced_batches
        multi = evaluate_concurrent(vg, bundle.bootstrap, seeds, q, self.threads, self.config.value_layout)
        outcome = self._outcome("cqrs", q, multi.arrays())
        outcome.timings.update({f"qrs_{k}": v for k, v in bundle.stats.timings.items()})
        outcome.timings['evaluation'] = time.perf_counter() - started
        outcome.qrs_stats = bundle.stats
        outcome.concurrent = multi
        outcome.edge_evaluations = multi.edge_evaluations
        return outcome
