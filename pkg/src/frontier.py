"""Frontier-based propagation with better-only scatter updates.

Each round expands the out-edges of the active vertices, evaluates the edge
function against the values as they stood at the start of the round, and
scatters the candidates with ``np.minimum.at`` / ``np.maximum.at`` (CASMIN /
CASMAX semantics). Vertices whose value strictly improved form the next
frontier. Workers only read during candidate generation; the scatter runs
after all of them finish, so results do not depend on the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar('T')

# Frontiers smaller than this are not worth splitting across threads
MIN_PARALLEL_FRONTIER = 256

EMPTY_IDS = np.zeros(0, dtype=np.int64)


@dataclass
class FrontierStats:
    """Counters collected while propagating."""
    rounds: int = 0
    edge_evaluations: int = 0
    updates: int = 0
    frontier_sizes: List[int] = field(default_factory=list)

    def merge(self, other: 'FrontierStats') -> None:
        self.rounds += other.rounds
        self.edge_evaluations += other.edge_evaluations
        self.updates += other.updates
        self.frontier_sizes.extend(other.frontier_sizes)


def expand_frontier(offsets: np.ndarray, frontier: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Source vertex and edge index of every out-edge of ``frontier``.

    Args:
        offsets: CSR offsets array
        frontier: Active vertex ids

    Returns:
        Tuple (sources, edge_indices), aligned
    """
    if frontier.size == 0:
        return EMPTY_IDS, EMPTY_IDS
    starts = offsets[frontier]
    counts = offsets[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return EMPTY_IDS, EMPTY_IDS
    sources = np.repeat(frontier, counts)
    group_start = np.repeat(np.cumsum(counts) - counts, counts)
    edge_indices = np.repeat(starts, counts) + (np.arange(total, dtype=np.int64) - group_start)
    return sources, edge_indices


def map_chunks(fn: Callable[[np.ndarray], T], frontier: np.ndarray, threads: int = 1) -> List[T]:
    """Apply ``fn`` to slices of the frontier, in parallel when worthwhile.

    Results come back in frontier order regardless of scheduling.
    """
    if threads <= 1 or frontier.size < MIN_PARALLEL_FRONTIER:
        return [fn(frontier)]
    chunks = [c for c in np.array_split(frontier, threads) if c.size]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def scatter_improvements(values: np.ndarray, targets: np.ndarray, candidates: np.ndarray, spec) -> np.ndarray:
    """Apply candidates with better-only replacement.

    Args:
        values: Value array, updated in place
        targets: Vertex per candidate
        candidates: Candidate values
        spec: AlgorithmSpec supplying the direction

    Returns:
        Sorted unique vertices whose value strictly improved
    """
    if targets.size == 0:
        return EMPTY_IDS
    touched = np.unique(targets)
    before = values[touched].copy()
    spec.scatter_better(values, targets, candidates)
    return touched[values[touched] != before]


def _layer_candidates(layers: Sequence, values: np.ndarray, chunk: np.ndarray, spec) -> Tuple[np.ndarray, np.ndarray]:
    targets, candidates = [], []
    for layer in layers:
        sources, edges = expand_frontier(layer.offsets, chunk)
        if edges.size == 0:
            continue
        targets.append(layer.targets[edges])
        candidates.append(spec.edge_function(values[sources], layer.weights[edges]))
    if not targets:
        return EMPTY_IDS, np.zeros(0, dtype=np.float64)
    return np.concatenate(targets), np.concatenate(candidates)


def propagate(
    layers: Sequence,
    values: np.ndarray,
    frontier: np.ndarray,
    spec,
    threads: int = 1,
    stats: FrontierStats = None,
) -> np.ndarray:
    """Run rounds until no value changes.

    Args:
        layers: CSR graphs (anything with offsets/targets/weights) whose
            union is the graph being traversed
        values: Value array, updated in place
        frontier: Initially active vertices
        spec: AlgorithmSpec
        threads: Worker threads for candidate generation
        stats: Optional counters to accumulate into

    Returns:
        ``values``
    """
    stats = stats if stats is not None else FrontierStats()
    frontier = np.unique(np.asarray(frontier, dtype=np.int64))

    while frontier.size:
        stats.rounds += 1
        stats.frontier_sizes.append(int(frontier.size))
        parts = map_chunks(lambda chunk: _layer_candidates(layers, values, chunk, spec), frontier, threads)
        targets = np.concatenate([p[0] for p in parts])
        candidates = np.concatenate([p[1] for p in parts])
        stats.edge_evaluations += int(targets.size)

        frontier = scatter_improvements(values, targets, candidates, spec)
        stats.updates += int(frontier.size)
        logger.debug(
            f"Round {stats.rounds}: {stats.frontier_sizes[-1]} active, "
            f"{targets.size} edges evaluated, {frontier.size} improved"
        )

    return values
