"""Evaluate all snapshots at once over a versioned graph.

A single snapshot-oblivious frontier is shared by every snapshot: a vertex
improved in any snapshot has its out-edges evaluated for every snapshot that
owns the edge. Evaluations for snapshots in which the vertex did not change
are harmless because updates only ever replace a value by a strictly better
one.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np

from src.algorithms import QueryContext
from src.config import MASK_WORD_BITS
from src.exceptions import ConfigurationError, SnapshotRangeError
from src.frontier import EMPTY_IDS, expand_frontier, map_chunks, scatter_improvements
from src.graph_model import (
    EdgeTriple,
    ValueArray,
    VersionedEdge,
    VersionedGraph,
    mask_has_snapshot,
    triples_to_arrays,
)

logger = logging.getLogger(__name__)

LAYOUTS = ("snapshot_major", "vertex_major")


def snapshot_has_edge(edge: VersionedEdge, i: int) -> bool:
    """Whether snapshot i owns a versioned edge."""
    return mask_has_snapshot(edge.mask, i)


@dataclass
class RoundTelemetry:
    round: int
    frontier_size: int
    edge_evaluations: int
    updates_per_snapshot: List[int]


@dataclass
class MultiResult:
    """Per-snapshot value arrays produced by one concurrent evaluation.

    ``values`` is indexed ``[snapshot, vertex]`` whatever the storage layout.
    """
    values: np.ndarray
    seed_evaluations: int = 0
    telemetry: List[RoundTelemetry] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, i: int) -> ValueArray:
        return np.ascontiguousarray(self.values[i])

    def arrays(self) -> List[ValueArray]:
        return [self[i] for i in range(len(self))]

    @property
    def rounds(self) -> int:
        return len(self.telemetry)

    @property
    def edge_evaluations(self) -> int:
        return self.seed_evaluations + sum(r.edge_evaluations for r in self.telemetry)


def _allocate(bootstrap: ValueArray, num_snapshots: int, layout: str) -> np.ndarray:
    if layout == "vertex_major":
        # n values contiguous per vertex; exposed as a [snapshot, vertex] view
        storage = np.repeat(bootstrap[:, None], num_snapshots, axis=1)
        return storage.T
    return np.repeat(bootstrap[None, :], num_snapshots, axis=0)


def _owned(masks: np.ndarray, i: int) -> np.ndarray:
    word = masks[:, i // MASK_WORD_BITS]
    return ((word >> np.uint64(i % MASK_WORD_BITS)) & np.uint64(1)).astype(bool)


def _round_candidates(vg: VersionedGraph, values: np.ndarray, chunk: np.ndarray, spec):
    """Per-snapshot (targets, candidates) for the out-edges of ``chunk``."""
    n = vg.num_snapshots
    sources, edges = expand_frontier(vg.offsets, chunk)
    if edges.size == 0:
        empty = (EMPTY_IDS, np.zeros(0, dtype=np.float64))
        return [empty] * n, 0

    common = (edges - vg.offsets[sources]) < vg.common_counts[sources]
    common_sources, common_edges = sources[common], edges[common]
    specific_sources, specific_edges = sources[~common], edges[~common]

    common_targets = vg.targets[common_edges]
    # Common edges: one vectorized evaluation across all snapshots, no mask test
    common_candidates = spec.edge_function(values[:, common_sources], vg.weights[common_edges])
    evaluations = common_edges.size * n

    specific_targets = vg.targets[specific_edges]
    specific_weights = vg.weights[specific_edges]
    specific_masks = vg.masks[specific_edges]

    per_snapshot = []
    for i in range(n):
        owned = _owned(specific_masks, i)
        owned_count = int(owned.sum())
        evaluations += owned_count
        if owned_count:
            candidates = spec.edge_function(values[i, specific_sources[owned]], specific_weights[owned])
            per_snapshot.append((
                np.concatenate([common_targets, specific_targets[owned]]),
                np.concatenate([common_candidates[i], candidates]),
            ))
        else:
            per_snapshot.append((common_targets, common_candidates[i]))
    return per_snapshot, evaluations


def evaluate_concurrent(
    vg: VersionedGraph,
    bootstrap: ValueArray,
    batches: Sequence[Iterable[EdgeTriple]],
    q: QueryContext,
    threads: int = 1,
    layout: str = "snapshot_major",
) -> MultiResult:
    """Evaluate every snapshot embedded in ``vg`` concurrently.

    Args:
        vg: Versioned graph built from the reduced graph and reduced batches
        bootstrap: Starting values for every snapshot
        batches: Per-snapshot addition batches used to seed the frontier;
            edges missing from ``vg`` may only point at vertices whose values
            are already final
        q: Query
        threads: Worker threads per round
        layout: ``snapshot_major`` or ``vertex_major`` value storage

    Returns:
        MultiResult with one value array per snapshot

    Raises:
        ConfigurationError: On snapshot-count or vertex-count mismatches
    """
    n = vg.num_snapshots
    if len(batches) != n:
        raise ConfigurationError(f"got {len(batches)} batches for a versioned graph of {n} snapshots")
    if bootstrap.shape != (vg.num_vertices,):
        raise ConfigurationError(
            f"bootstrap covers {bootstrap.shape[0]} vertices, versioned graph has {vg.num_vertices}"
        )
    if layout not in LAYOUTS:
        raise ConfigurationError(f"unknown value layout '{layout}'")

    spec = q.spec
    spec.check_weights(vg.weights)
    values = _allocate(np.asarray(bootstrap, dtype=np.float64), n, layout)
    result = MultiResult(values)

    # Seeding completes before the first round starts
    active = np.zeros(vg.num_vertices, dtype=bool)
    for i, batch in enumerate(batches):
        sources, targets, weights = triples_to_arrays(batch)
        if sources.size == 0:
            continue
        if sources.max() >= vg.num_vertices or targets.max() >= vg.num_vertices:
            raise SnapshotRangeError(f"batch {i} references a vertex outside 0..{vg.num_vertices - 1}")
        spec.check_weights(weights)
        result.seed_evaluations += int(sources.size)
        improved = scatter_improvements(values[i], targets, spec.edge_function(values[i, sources], weights), spec)
        active[improved] = True

    frontier = np.flatnonzero(active)
    while frontier.size:
        parts = map_chunks(lambda chunk: _round_candidates(vg, values, chunk, spec), frontier, threads)
        evaluations = sum(p[1] for p in parts)

        active[:] = False
        updates = []
        for i in range(n):
            targets = np.concatenate([p[0][i][0] for p in parts])
            candidates = np.concatenate([p[0][i][1] for p in parts])
            improved = scatter_improvements(values[i], targets, candidates, spec)
            active[improved] = True
            updates.append(int(improved.size))

        result.telemetry.append(RoundTelemetry(len(result.telemetry) + 1, int(frontier.size), evaluations, updates))
        logger.debug(
            f"Concurrent round {len(result.telemetry)}: {frontier.size} active, "
            f"{evaluations} edge evaluations, {sum(updates)} updates"
        )
        frontier = np.flatnonzero(active)

    return result
