"""Addition-only incremental evaluation and the direct-hop baseline."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.algorithms import QueryContext, is_fixpoint
from src.exceptions import ConfigurationError, PreconditionError, SnapshotRangeError
from src.frontier import FrontierStats, propagate, scatter_improvements
from src.graph_model import EdgeTriple, Graph, ValueArray, graph_from_arrays, triples_to_arrays

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IncrementalSeed:
    """A fixpoint on some base graph plus the edges to add to it."""
    base_values: ValueArray
    additions: Tuple[EdgeTriple, ...] = field(default=())


def _addition_arrays(additions: Iterable[EdgeTriple], num_vertices: int):
    sources, targets, weights = triples_to_arrays(additions)
    if sources.size:
        bad = (sources < 0) | (sources >= num_vertices) | (targets < 0) | (targets >= num_vertices)
        if bad.any():
            k = int(np.argmax(bad))
            raise SnapshotRangeError(
                f"added edge ({sources[k]}, {targets[k]}, {weights[k]:g}) references a vertex "
                f"outside 0..{num_vertices - 1}"
            )
    return sources, targets, weights


def seed_additions(
    values: ValueArray,
    sources: np.ndarray,
    targets: np.ndarray,
    weights: np.ndarray,
    q: QueryContext,
) -> np.ndarray:
    """Apply added edges once; returns the sinks whose value improved."""
    if sources.size == 0:
        return np.zeros(0, dtype=np.int64)
    candidates = q.spec.edge_function(values[sources], weights)
    return scatter_improvements(values, targets, candidates, q.spec)


def evaluate_incremental_additions(
    g_base: Graph,
    seed: IncrementalSeed,
    q: QueryContext,
    threads: int = 1,
    stats: Optional[FrontierStats] = None,
    check_seed: bool = False,
) -> ValueArray:
    """Extend a fixpoint on ``g_base`` by a batch of added edges.

    The merged graph is never materialized: the additions are indexed in a
    small CSR overlay traversed alongside the base adjacency.

    Args:
        g_base: Graph the seed values are a fixpoint of (not modified)
        seed: Base values and the edges to add
        q: Query
        threads: Worker threads per round
        stats: Optional counters to accumulate into
        check_seed: Verify that the base values are a fixpoint first

    Returns:
        Fixpoint of g_base ∪ additions

    Raises:
        SnapshotRangeError: If an addition references an unknown vertex
        ConfigurationError: If the base values do not match the graph size
    """
    if seed.base_values.shape != (g_base.num_vertices,):
        raise ConfigurationError(
            f"base values cover {seed.base_values.shape[0]} vertices, graph has {g_base.num_vertices}"
        )
    if check_seed and not is_fixpoint([g_base], seed.base_values, q.spec):
        raise PreconditionError("seed values are not a fixpoint of the base graph")

    sources, targets, weights = _addition_arrays(seed.additions, g_base.num_vertices)
    q.spec.check_weights(g_base.weights)
    q.spec.check_weights(weights)

    stats = stats if stats is not None else FrontierStats()
    values = seed.base_values.copy()
    frontier = seed_additions(values, sources, targets, weights, q)
    stats.edge_evaluations += int(sources.size)
    stats.updates += int(frontier.size)

    if frontier.size:
        overlay = graph_from_arrays(g_base.num_vertices, sources, targets, weights)
        propagate([g_base, overlay], values, frontier, q.spec, threads, stats)
    return values


def direct_hop_all(
    g_intersection: Graph,
    r_intersection: ValueArray,
    batches: Sequence[Iterable[EdgeTriple]],
    q: QueryContext,
    threads: int = 1,
    expected_snapshots: Optional[int] = None,
    stats: Optional[List[FrontierStats]] = None,
) -> List[ValueArray]:
    """Evaluate every snapshot by adding its batch to a shared base.

    Snapshots are independent and run concurrently when ``threads`` > 1;
    each owns its value array.

    Args:
        g_intersection: Shared base graph
        r_intersection: Fixpoint of the base graph
        batches: Per-snapshot addition batches
        q: Query
        threads: Number of snapshots evaluated at once
        expected_snapshots: If given, the number of batches required
        stats: Optional list receiving one FrontierStats per snapshot

    Returns:
        One value array per batch, in batch order
    """
    if expected_snapshots is not None and len(batches) != expected_snapshots:
        raise ConfigurationError(
            f"got {len(batches)} addition batches for {expected_snapshots} snapshots"
        )

    per_snapshot = [FrontierStats() for _ in batches]

    def run(index: int) -> ValueArray:
        seed = IncrementalSeed(r_intersection, tuple(batches[index]))
        return evaluate_incremental_additions(g_intersection, seed, q, stats=per_snapshot[index])

    if threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(batches))))
    else:
        results = [run(i) for i in range(len(batches))]

    if stats is not None:
        stats.extend(per_snapshot)
    logger.debug(
        f"Direct hop: {len(batches)} snapshots, "
        f"{sum(s.edge_evaluations for s in per_snapshot)} edge evaluations"
    )
    return results
