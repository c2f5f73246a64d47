"""Parsing, snapshot materialization and intersection/union construction.

Text formats:
    edge list   one ``src dst [weight]`` per line, ``#`` starts a comment
    delta       one ``+ src dst [weight]`` or ``- src dst [weight]`` per line
    manifest    JSON, see :class:`src.config.Manifest`
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, TextIO, Tuple, Union

from pydantic import ValidationError

from src.config import Manifest
from src.exceptions import ConsistencyError, DomainError, GraphFormatError, SnapshotRangeError
from src.graph_model import EdgeTriple, Graph, build_graph, check_triples

logger = logging.getLogger(__name__)

DEFAULT_WEIGHT = 1.0
_ADD_PREFIXES = {'+'}
_DELETE_PREFIXES = {'-', '−'}  # ASCII hyphen and the unicode minus sign

TextSource = Union[str, TextIO, Iterable[str]]


class VertexIdMap:
    """Maps external vertex ids (tokens) to dense zero-based ids.

    In ``remap`` mode new tokens get the next dense id in order of first
    appearance. In ``integer`` mode tokens must be non-negative integers and
    are used as-is, optionally bounded by ``limit``.
    """

    def __init__(self, mode: str = "remap", limit: Optional[int] = None):
        if mode not in ("remap", "integer"):
            raise ValueError(f"unknown id map mode: {mode}")
        self.mode = mode
        self.limit = limit
        self._dense: Dict[str, int] = {}
        self._external: List[str] = []

    @classmethod
    def identity(cls, num_vertices: int) -> 'VertexIdMap':
        return cls(mode="integer", limit=num_vertices)

    def resolve(self, token: str, line_number: Optional[int] = None, source: Optional[str] = None) -> int:
        """Dense id for an external token, registering it if needed."""
        if self.mode == "integer":
            try:
                vertex = int(token)
            except ValueError:
                raise GraphFormatError(f"vertex id '{token}' is not an integer", line_number, source)
            if vertex < 0 or (self.limit is not None and vertex >= self.limit):
                bound = f"0..{self.limit - 1}" if self.limit is not None else "non-negative"
                raise GraphFormatError(f"vertex id {vertex} outside {bound}", line_number, source)
            return vertex

        dense = self._dense.get(token)
        if dense is None:
            dense = len(self._external)
            self._dense[token] = dense
            self._external.append(token)
        return dense

    def lookup(self, token: str) -> int:
        """Dense id of a known token; never registers new ones.

        Raises:
            SnapshotRangeError: If the token names no vertex of the dataset
        """
        if self.mode == "integer":
            try:
                vertex = int(token)
            except ValueError:
                raise SnapshotRangeError(f"vertex id '{token}' is not an integer")
            if vertex < 0 or (self.limit is not None and vertex >= self.limit):
                raise SnapshotRangeError(f"vertex {token} is not part of the dataset")
            return vertex
        if token not in self._dense:
            raise SnapshotRangeError(f"vertex '{token}' does not appear in the dataset")
        return self._dense[token]

    def external(self, vertex: int) -> str:
        if self.mode == "integer":
            return str(vertex)
        return self._external[vertex]

    def __len__(self) -> int:
        return len(self._external)

    def output_order(self, num_vertices: int) -> List[int]:
        """Dense ids in ascending external-id order (numeric when possible)."""
        if self.mode == "integer":
            return list(range(num_vertices))

        def key(vertex: int):
            token = self._external[vertex]
            try:
                return (0, int(token), token)
            except ValueError:
                return (1, 0, token)

        return sorted(range(num_vertices), key=key)


@dataclass(frozen=True)
class DeltaBatch:
    """Edge additions and deletions turning one snapshot into the next."""
    additions: Tuple[EdgeTriple, ...] = ()
    deletions: Tuple[EdgeTriple, ...] = ()

    def __len__(self) -> int:
        return len(self.additions) + len(self.deletions)


@dataclass(frozen=True)
class AdditionBatch:
    """Edges to add to the intersection graph to rebuild one snapshot."""
    snapshot: int
    triples: Tuple[EdgeTriple, ...] = ()

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)


@dataclass(frozen=True)
class SnapshotSeries:
    """Edge sets E_0..E_n over one shared vertex universe.

    ``first_index`` is the original index of ``edge_sets[0]`` when the series
    is a window of a longer one.
    """
    num_vertices: int
    edge_sets: Tuple[FrozenSet[EdgeTriple], ...]
    id_map: Optional[VertexIdMap] = field(default=None, compare=False)
    first_index: int = 0

    def __len__(self) -> int:
        return len(self.edge_sets)

    @property
    def snapshot_indices(self) -> List[int]:
        return list(range(self.first_index, self.first_index + len(self.edge_sets)))

    def graph(self, i: int) -> Graph:
        """Graph of the i-th snapshot of this series (0-based within the series)."""
        return build_graph(self.edge_sets[i], self.num_vertices)

    def window(self, start: int, stop: int) -> 'SnapshotSeries':
        """Sub-series of snapshots start..stop-1 (indices within this series)."""
        if not 0 <= start < stop <= len(self.edge_sets):
            raise SnapshotRangeError(
                f"window {start}:{stop} is not a non-empty range inside 0:{len(self.edge_sets)}"
            )
        return SnapshotSeries(
            self.num_vertices,
            self.edge_sets[start:stop],
            self.id_map,
            self.first_index + start,
        )


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

def _lines(stream: TextSource) -> Iterable[str]:
    if isinstance(stream, str):
        return stream.splitlines()
    return stream


def _parse_weight(token: Optional[str], line_number: int, source: Optional[str]) -> float:
    if token is None:
        return DEFAULT_WEIGHT
    try:
        weight = float(token)
    except ValueError:
        raise GraphFormatError(f"weight '{token}' is not a number", line_number, source)
    if weight != weight or weight in (float('inf'), float('-inf')):
        raise GraphFormatError(f"weight '{token}' is not finite", line_number, source)
    if weight < 0:
        raise DomainError(f"{source or 'line'} {line_number}: negative weight {weight}")
    return weight


def _parse_edge_tokens(
    tokens: Sequence[str],
    id_map: VertexIdMap,
    line_number: int,
    source: Optional[str],
) -> EdgeTriple:
    if len(tokens) not in (2, 3):
        raise GraphFormatError(
            f"expected 'src dst [weight]', got {len(tokens)} field(s)", line_number, source
        )
    weight = _parse_weight(tokens[2] if len(tokens) == 3 else None, line_number, source)
    src = id_map.resolve(tokens[0], line_number, source)
    dst = id_map.resolve(tokens[1], line_number, source)
    return EdgeTriple(src, dst, weight)


def parse_edge_list(
    stream: TextSource,
    id_map: Optional[VertexIdMap] = None,
    source: Optional[str] = None,
) -> Tuple[Set[EdgeTriple], VertexIdMap]:
    """Parse an edge list.

    Args:
        stream: Text or an iterable of lines
        id_map: Id map to resolve (and extend) vertex tokens; a fresh
            first-appearance remapping map when None
        source: Name used in error messages

    Returns:
        Tuple of (set of edge triples, id map)

    Raises:
        GraphFormatError: On a malformed line
        DomainError: On a negative weight
    """
    id_map = id_map if id_map is not None else VertexIdMap()
    triples: Set[EdgeTriple] = set()
    for line_number, raw in enumerate(_lines(stream), start=1):
        tokens = raw.split('#', 1)[0].split()
        if not tokens:
            continue
        triples.add(_parse_edge_tokens(tokens, id_map, line_number, source))
    return triples, id_map


def parse_delta_batch(
    stream: TextSource,
    id_map: Optional[VertexIdMap] = None,
    source: Optional[str] = None,
) -> DeltaBatch:
    """Parse one transition's delta file.

    Args:
        stream: Text or an iterable of lines
        id_map: Id map shared with the base edge list; plain integer ids
            when None
        source: Name used in error messages

    Returns:
        DeltaBatch with additions and deletions in input order
    """
    id_map = id_map if id_map is not None else VertexIdMap(mode="integer")
    additions: List[EdgeTriple] = []
    deletions: List[EdgeTriple] = []
    for line_number, raw in enumerate(_lines(stream), start=1):
        tokens = raw.split('#', 1)[0].split()
        if not tokens:
            continue
        prefix, rest = tokens[0], tokens[1:]
        # Accept "+0 1 2" as well as "+ 0 1 2"
        if len(prefix) > 1 and prefix[0] in _ADD_PREFIXES | _DELETE_PREFIXES:
            prefix, rest = prefix[0], [prefix[1:]] + rest
        if prefix in _ADD_PREFIXES:
            additions.append(_parse_edge_tokens(rest, id_map, line_number, source))
        elif prefix in _DELETE_PREFIXES:
            deletions.append(_parse_edge_tokens(rest, id_map, line_number, source))
        else:
            raise GraphFormatError(f"unknown delta prefix '{prefix}' (expected '+' or '-')", line_number, source)
    return DeltaBatch(tuple(additions), tuple(deletions))


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def format_number(value: float) -> str:
    """Shortest text that parses back to the same float ("1" for 1.0)."""
    if value == float('inf'):
        return "inf"
    if value == float('-inf'):
        return "-inf"
    return format(value, '.17g') if value != int(value) else str(int(value))


def format_edge_list(triples: Iterable[EdgeTriple], id_map: Optional[VertexIdMap] = None, header: Optional[str] = None) -> str:
    id_map = id_map or VertexIdMap(mode="integer")
    lines = [f"# {header}"] if header else []
    for src, dst, weight in sorted(triples):
        lines.append(f"{id_map.external(src)} {id_map.external(dst)} {format_number(weight)}")
    return "\n".join(lines) + "\n"


def format_delta_batch(batch: DeltaBatch, id_map: Optional[VertexIdMap] = None) -> str:
    id_map = id_map or VertexIdMap(mode="integer")
    lines = []
    for prefix, triples in (('+', batch.additions), ('-', batch.deletions)):
        for src, dst, weight in triples:
            lines.append(f"{prefix} {id_map.external(src)} {id_map.external(dst)} {format_number(weight)}")
    return "\n".join(lines) + "\n" if lines else ""


# --------------------------------------------------------------------------
# Snapshot algebra
# --------------------------------------------------------------------------

def materialize_snapshots(
    base: Iterable[EdgeTriple],
    deltas: Sequence[DeltaBatch],
    num_vertices: Optional[int] = None,
    id_map: Optional[VertexIdMap] = None,
) -> SnapshotSeries:
    """Apply transition deltas to a base edge set.

    Args:
        base: Edge set of snapshot 0
        deltas: Delta batch i+1 turns snapshot i into snapshot i+1
        num_vertices: Vertex universe size; inferred from the edges when None
        id_map: Id map to keep with the series for output

    Returns:
        SnapshotSeries with len(deltas) + 1 snapshots

    Raises:
        ConsistencyError: If a deletion targets an absent triple or an
            addition targets a present one
    """
    current = frozenset(base)
    if num_vertices is None:
        referenced = [v for t in current for v in (t.src, t.dst)]
        referenced += [v for d in deltas for t in d.additions + d.deletions for v in (t.src, t.dst)]
        num_vertices = max(referenced) + 1 if referenced else 0
    check_triples(list(current), num_vertices)

    edge_sets = [current]
    for index, delta in enumerate(deltas, start=1):
        check_triples(list(delta.additions) + list(delta.deletions), num_vertices)
        for triple in delta.deletions:
            if triple not in current:
                raise ConsistencyError(f"deletes absent edge {tuple(triple)}", index, triple)
        for triple in delta.additions:
            if triple in current:
                raise ConsistencyError(f"adds present edge {tuple(triple)}", index, triple)
        current = (current - frozenset(delta.deletions)) | frozenset(delta.additions)
        edge_sets.append(current)
        logger.debug(
            f"Snapshot {index}: +{len(delta.additions)} -{len(delta.deletions)} -> {len(current)} edges"
        )

    return SnapshotSeries(num_vertices, tuple(edge_sets), id_map)


def series_from_snapshots(
    edge_sets: Sequence[Iterable[EdgeTriple]],
    num_vertices: int,
    id_map: Optional[VertexIdMap] = None,
) -> SnapshotSeries:
    """Series from complete per-snapshot edge sets."""
    if not edge_sets:
        raise SnapshotRangeError("a snapshot series needs at least one snapshot")
    frozen = tuple(frozenset(s) for s in edge_sets)
    for edges in frozen:
        check_triples(list(edges), num_vertices)
    return SnapshotSeries(num_vertices, frozen, id_map)


def derive_deltas(series: SnapshotSeries) -> List[DeltaBatch]:
    """Transition deltas reproducing ``series`` from its first snapshot."""
    deltas = []
    for before, after in zip(series.edge_sets, series.edge_sets[1:]):
        deltas.append(DeltaBatch(tuple(sorted(after - before)), tuple(sorted(before - after))))
    return deltas


def intersection_edges(series: SnapshotSeries) -> FrozenSet[EdgeTriple]:
    if not series.edge_sets:
        raise SnapshotRangeError("cannot intersect an empty snapshot series")
    return frozenset.intersection(*series.edge_sets)


def union_edges(series: SnapshotSeries) -> FrozenSet[EdgeTriple]:
    if not series.edge_sets:
        raise SnapshotRangeError("cannot unite an empty snapshot series")
    return frozenset.union(*series.edge_sets)


def build_intersection(series: SnapshotSeries) -> Graph:
    """Graph of the edges present in every snapshot."""
    return build_graph(intersection_edges(series), series.num_vertices)


def build_union(series: SnapshotSeries) -> Graph:
    """Graph of the edges present in any snapshot."""
    return build_graph(union_edges(series), series.num_vertices)


def build_addition_batches(series: SnapshotSeries, intersection: Graph) -> List[AdditionBatch]:
    """Per-snapshot edges missing from the intersection graph.

    Args:
        series: Snapshot series
        intersection: Intersection graph of ``series``

    Returns:
        One AdditionBatch per snapshot, triples sorted
    """
    common = intersection.edge_set()
    return [
        AdditionBatch(i, tuple(sorted(edges - common)))
        for i, edges in enumerate(series.edge_sets)
    ]


# --------------------------------------------------------------------------
# Manifest I/O
# --------------------------------------------------------------------------

def load_manifest(manifest_path: Union[str, Path]) -> Manifest:
    """Load and validate a manifest JSON file.

    Raises:
        FileNotFoundError: If the manifest does not exist
        GraphFormatError: If the JSON is malformed or fails validation
    """
    path = Path(manifest_path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest file not found: {manifest_path}")

    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in manifest: {manifest_path}")
        raise GraphFormatError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", source=str(path))

    try:
        return Manifest(**data)
    except ValidationError as e:
        details = [f"  - {'.'.join(str(x) for x in err['loc']) or '(root)'}: {err['msg']}" for err in e.errors()]
        raise GraphFormatError("manifest validation failed:\n" + "\n".join(details), source=str(path))


def write_manifest(manifest: Manifest, manifest_path: Union[str, Path]) -> Path:
    path = Path(manifest_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = manifest.model_dump(exclude_none=True)
    if manifest.format == "snapshots":
        data.pop("deltas", None)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding='utf-8')
    return path


def load_series(manifest_path: Union[str, Path]) -> SnapshotSeries:
    """Load the snapshot series a manifest describes.

    Args:
        manifest_path: Path to the manifest JSON

    Returns:
        Materialized SnapshotSeries carrying the vertex id map
    """
    path = Path(manifest_path)
    manifest = load_manifest(path)
    root = path.parent
    id_map = VertexIdMap() if manifest.remap_ids else VertexIdMap.identity(manifest.num_vertices)

    def read(relative: str) -> str:
        file_path = root / relative
        if not file_path.exists():
            raise FileNotFoundError(f"File listed in manifest not found: {file_path}")
        return file_path.read_text(encoding='utf-8')

    if manifest.format == "snapshots":
        edge_sets = [parse_edge_list(read(p), id_map, source=p)[0] for p in manifest.snapshots]
        num_vertices = _resolved_vertex_count(manifest, id_map, path)
        series = series_from_snapshots(edge_sets, num_vertices, id_map)
    else:
        base, _ = parse_edge_list(read(manifest.base), id_map, source=manifest.base)
        deltas = [parse_delta_batch(read(p), id_map, source=p) for p in manifest.deltas]
        num_vertices = _resolved_vertex_count(manifest, id_map, path)
        series = materialize_snapshots(base, deltas, num_vertices, id_map)

    logger.info(f"Loaded {len(series)} snapshots over {series.num_vertices} vertices from {path}")
    return series


def _resolved_vertex_count(manifest: Manifest, id_map: VertexIdMap, path: Path) -> int:
    if not manifest.remap_ids:
        return manifest.num_vertices
    # Remapped datasets: 0 means "infer", anything else must match the ids seen
    if manifest.num_vertices not in (0, len(id_map)):
        raise GraphFormatError(
            f"manifest declares {manifest.num_vertices} vertices but the files name {len(id_map)}",
            source=str(path),
        )
    return len(id_map)
