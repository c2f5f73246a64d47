"""Core graph types: edge triples, CSR graphs, version masks and value arrays.

Graphs are stored in compressed sparse row form on numpy arrays. Every
adjacency list is sorted by (dst, weight) so that traversal order and all
outputs derived from it are deterministic. Objects are treated as immutable
after construction; the backing arrays are flagged read-only.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, NamedTuple, Sequence, Set, Tuple

import numpy as np

from src.config import MASK_WORD_BITS
from src.exceptions import CapacityError, DomainError, GraphFormatError, SnapshotRangeError

logger = logging.getLogger(__name__)

# Per-vertex query results; one float64 slot per vertex.
ValueArray = np.ndarray

_WORD_MASK = (1 << MASK_WORD_BITS) - 1


class EdgeTriple(NamedTuple):
    """A directed weighted edge. Identity is the full triple."""
    src: int
    dst: int
    weight: float


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _csr_offsets(sources: np.ndarray, num_vertices: int) -> np.ndarray:
    counts = np.bincount(sources, minlength=num_vertices) if sources.size else np.zeros(num_vertices, dtype=np.int64)
    offsets = np.zeros(num_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets


class Graph:
    """Directed weighted graph in CSR form.

    Attributes:
        num_vertices: Number of vertices (dense ids 0..num_vertices-1)
        offsets: ``offsets[u]:offsets[u+1]`` indexes u's out-edges
        targets: Destination vertex per edge
        weights: Weight per edge
    """

    __slots__ = ('num_vertices', 'offsets', 'targets', 'weights')

    def __init__(self, num_vertices: int, offsets: np.ndarray, targets: np.ndarray, weights: np.ndarray):
        self.num_vertices = num_vertices
        self.offsets = _frozen(offsets)
        self.targets = _frozen(targets)
        self.weights = _frozen(weights)

    @property
    def edge_count(self) -> int:
        return int(self.targets.size)

    def sources(self) -> np.ndarray:
        """Source vertex of every edge, aligned with ``targets``."""
        return np.repeat(np.arange(self.num_vertices, dtype=np.int64), np.diff(self.offsets))

    def adjacency(self, u: int) -> List[Tuple[int, float]]:
        """Ordered (dst, weight) pairs of u's out-edges."""
        start, end = self.offsets[u], self.offsets[u + 1]
        return [(int(d), float(w)) for d, w in zip(self.targets[start:end], self.weights[start:end])]

    def triples(self) -> Iterator[EdgeTriple]:
        for s, d, w in zip(self.sources().tolist(), self.targets.tolist(), self.weights.tolist()):
            yield EdgeTriple(s, d, w)

    def edge_set(self) -> Set[EdgeTriple]:
        return set(self.triples())

    def __repr__(self) -> str:
        return f"Graph(num_vertices={self.num_vertices}, edge_count={self.edge_count})"


def graph_from_arrays(num_vertices: int, sources: np.ndarray, targets: np.ndarray, weights: np.ndarray) -> Graph:
    """Build a CSR graph from parallel edge arrays, sorting and deduplicating.

    Args:
        num_vertices: Size of the vertex universe
        sources: Source id per edge
        targets: Destination id per edge
        weights: Weight per edge

    Returns:
        Graph with (src, dst, weight)-sorted, duplicate-free adjacency
    """
    sources = np.asarray(sources, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)

    if sources.size:
        order = np.lexsort((weights, targets, sources))
        sources, targets, weights = sources[order], targets[order], weights[order]
        keep = np.ones(sources.size, dtype=bool)
        keep[1:] = (
            (sources[1:] != sources[:-1])
            | (targets[1:] != targets[:-1])
            | (weights[1:] != weights[:-1])
        )
        sources, targets, weights = sources[keep], targets[keep], weights[keep]

    return Graph(num_vertices, _csr_offsets(sources, num_vertices), targets.copy(), weights.copy())


def triples_to_arrays(triples: Iterable[EdgeTriple]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split triples into (src, dst, weight) numpy arrays."""
    triples = list(triples)
    if not triples:
        return (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64))
    src, dst, weight = zip(*triples)
    return (
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
        np.asarray(weight, dtype=np.float64),
    )


def check_triples(triples: Sequence[EdgeTriple], num_vertices: int) -> None:
    """Reject out-of-range vertex ids and negative weights."""
    for triple in triples:
        src, dst, weight = triple
        if not (0 <= src < num_vertices and 0 <= dst < num_vertices):
            raise GraphFormatError(
                f"edge {tuple(triple)} references a vertex outside 0..{num_vertices - 1}"
            )
        if weight < 0:
            raise DomainError(f"edge {tuple(triple)} has a negative weight")


def build_graph(triples: Iterable[EdgeTriple], num_vertices: int) -> Graph:
    """Build a graph from a set of edge triples.

    Args:
        triples: Edge triples; identical triples collapse into one edge
        num_vertices: Size of the vertex universe

    Returns:
        Graph with sorted, deduplicated adjacency lists

    Raises:
        GraphFormatError: If a triple references a vertex >= num_vertices
        DomainError: If a weight is negative
    """
    unique = set(EdgeTriple(int(s), int(d), float(w)) for s, d, w in triples)
    check_triples(list(unique), num_vertices)
    return graph_from_arrays(num_vertices, *triples_to_arrays(unique))


# --------------------------------------------------------------------------
# Version masks
# --------------------------------------------------------------------------

def words_for(num_snapshots: int) -> int:
    return max(1, -(-num_snapshots // MASK_WORD_BITS))


@dataclass(frozen=True)
class VersionMask:
    """Snapshot-ownership bitmask of one edge, split into 64-bit words.

    Bit i (word i // 64, position i % 64) is set iff the edge is present in
    snapshot i. Bits at positions >= num_snapshots are always zero.
    """

    words: Tuple[int, ...]
    num_snapshots: int

    @classmethod
    def from_bits(cls, bits: int, num_snapshots: int) -> 'VersionMask':
        if bits >> num_snapshots:
            raise SnapshotRangeError(f"mask {bits:b} sets bits beyond {num_snapshots} snapshots")
        words = tuple((bits >> (MASK_WORD_BITS * k)) & _WORD_MASK for k in range(words_for(num_snapshots)))
        return cls(words, num_snapshots)

    @classmethod
    def from_snapshots(cls, snapshots: Iterable[int], num_snapshots: int) -> 'VersionMask':
        bits = 0
        for i in snapshots:
            if not 0 <= i < num_snapshots:
                raise SnapshotRangeError(f"snapshot {i} outside 0..{num_snapshots - 1}")
            bits |= 1 << i
        return cls.from_bits(bits, num_snapshots)

    @classmethod
    def full(cls, num_snapshots: int) -> 'VersionMask':
        return cls.from_bits((1 << num_snapshots) - 1, num_snapshots)

    @property
    def bits(self) -> int:
        return sum(word << (MASK_WORD_BITS * k) for k, word in enumerate(self.words))

    @property
    def is_full(self) -> bool:
        return self.bits == (1 << self.num_snapshots) - 1

    def snapshots(self) -> List[int]:
        bits = self.bits
        return [i for i in range(self.num_snapshots) if bits >> i & 1]

    def __str__(self) -> str:
        # Snapshot 0 is the rightmost digit: "1001" = snapshots 0 and 3
        return format(self.bits, f"0{self.num_snapshots}b")


def mask_has_snapshot(mask: VersionMask, i: int) -> bool:
    """Check whether snapshot i owns the edge carrying ``mask``.

    Raises:
        SnapshotRangeError: If i is not a valid snapshot index
    """
    if not 0 <= i < mask.num_snapshots:
        raise SnapshotRangeError(f"snapshot {i} outside 0..{mask.num_snapshots - 1}")
    return bool(mask.words[i // MASK_WORD_BITS] >> (i % MASK_WORD_BITS) & 1)


class VersionedEdge(NamedTuple):
    dst: int
    weight: float
    mask: VersionMask


class VersionedGraph:
    """Augmented adjacency structure embedding several snapshots.

    Each out-edge list starts with the edges owned by every snapshot
    (``common_counts[u]`` of them) followed by snapshot-specific edges; both
    groups are sorted by (dst, weight). ``masks`` holds one row of uint64 words
    per edge.
    """

    __slots__ = ('num_vertices', 'num_snapshots', 'offsets', 'targets', 'weights', 'masks', 'common_counts')

    def __init__(
        self,
        num_vertices: int,
        num_snapshots: int,
        offsets: np.ndarray,
        targets: np.ndarray,
        weights: np.ndarray,
        masks: np.ndarray,
        common_counts: np.ndarray,
    ):
        self.num_vertices = num_vertices
        self.num_snapshots = num_snapshots
        self.offsets = _frozen(offsets)
        self.targets = _frozen(targets)
        self.weights = _frozen(weights)
        self.masks = _frozen(masks)
        self.common_counts = _frozen(common_counts)

    @property
    def edge_count(self) -> int:
        return int(self.targets.size)

    @property
    def num_words(self) -> int:
        return int(self.masks.shape[1])

    def sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_vertices, dtype=np.int64), np.diff(self.offsets))

    def edge_mask(self, index: int) -> VersionMask:
        return VersionMask(tuple(int(w) for w in self.masks[index]), self.num_snapshots)

    def edges(self, u: int) -> List[VersionedEdge]:
        """Ordered versioned out-edges of vertex u."""
        start, end = int(self.offsets[u]), int(self.offsets[u + 1])
        return [
            VersionedEdge(int(self.targets[k]), float(self.weights[k]), self.edge_mask(k))
            for k in range(start, end)
        ]

    def owned_by(self, i: int) -> np.ndarray:
        """Boolean array over all edges: does snapshot i own the edge."""
        if not 0 <= i < self.num_snapshots:
            raise SnapshotRangeError(f"snapshot {i} outside 0..{self.num_snapshots - 1}")
        word = self.masks[:, i // MASK_WORD_BITS]
        return ((word >> np.uint64(i % MASK_WORD_BITS)) & np.uint64(1)).astype(bool)

    def snapshot_edge_set(self, i: int) -> Set[EdgeTriple]:
        """Triples of snapshot i embedded in this structure."""
        owned = self.owned_by(i)
        sources = self.sources()[owned]
        return {
            EdgeTriple(s, d, w)
            for s, d, w in zip(sources.tolist(), self.targets[owned].tolist(), self.weights[owned].tolist())
        }

    def __repr__(self) -> str:
        return (
            f"VersionedGraph(num_vertices={self.num_vertices}, "
            f"num_snapshots={self.num_snapshots}, edge_count={self.edge_count})"
        )


def build_versioned_graph(
    qrs: Graph,
    reduced_batches: Sequence[Iterable[EdgeTriple]],
    mask_capacity: int = MASK_WORD_BITS,
) -> VersionedGraph:
    """Merge the reduced graph and per-snapshot batches into one versioned graph.

    Args:
        qrs: Edges owned by every snapshot
        reduced_batches: One batch of snapshot-specific edges per snapshot
        mask_capacity: Maximum number of snapshots a mask may encode

    Returns:
        VersionedGraph whose snapshot i edge set is qrs ∪ reduced_batches[i]

    Raises:
        CapacityError: If there are more batches than mask_capacity allows
        GraphFormatError: If a batch edge references an unknown vertex
    """
    num_snapshots = len(reduced_batches)
    if num_snapshots == 0:
        raise CapacityError("a versioned graph needs at least one snapshot")
    if num_snapshots > mask_capacity:
        raise CapacityError(
            f"{num_snapshots} snapshots exceed the configured mask capacity of {mask_capacity}"
        )

    full_bits = (1 << num_snapshots) - 1
    ownership: Dict[EdgeTriple, int] = {triple: full_bits for triple in qrs.triples()}
    for i, batch in enumerate(reduced_batches):
        batch = [EdgeTriple(int(s), int(d), float(w)) for s, d, w in batch]
        check_triples(batch, qrs.num_vertices)
        for triple in batch:
            ownership[triple] = ownership.get(triple, 0) | (1 << i)

    ordered = sorted(
        ownership.items(),
        key=lambda item: (item[0].src, item[1] != full_bits, item[0].dst, item[0].weight),
    )
    num_words = words_for(num_snapshots)
    sources = np.fromiter((t.src for t, _ in ordered), dtype=np.int64, count=len(ordered))
    targets = np.fromiter((t.dst for t, _ in ordered), dtype=np.int64, count=len(ordered))
    weights = np.fromiter((t.weight for t, _ in ordered), dtype=np.float64, count=len(ordered))
    masks = np.zeros((len(ordered), num_words), dtype=np.uint64)
    is_common = np.zeros(len(ordered), dtype=bool)
    for k, (_, bits) in enumerate(ordered):
        is_common[k] = bits == full_bits
        for w in range(num_words):
            masks[k, w] = (bits >> (MASK_WORD_BITS * w)) & _WORD_MASK

    common_counts = (
        np.bincount(sources[is_common], minlength=qrs.num_vertices).astype(np.int64)
        if sources.size else np.zeros(qrs.num_vertices, dtype=np.int64)
    )
    logger.debug(
        f"Versioned graph: {len(ordered)} edges, {int(is_common.sum())} common, "
        f"{num_snapshots} snapshots in {num_words} mask word(s)"
    )
    return VersionedGraph(
        qrs.num_vertices,
        num_snapshots,
        _csr_offsets(sources, qrs.num_vertices),
        targets,
        weights,
        masks,
        common_counts,
    )
