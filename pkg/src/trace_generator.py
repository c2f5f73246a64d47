"""Synthetic evolution traces: a random base graph plus update batches."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

import numpy as np

from src.config import GeneratorConfig, Manifest
from src.exceptions import ConfigurationError
from src.graph_model import EdgeTriple
from src.ingest import DeltaBatch, format_delta_batch, format_edge_list, write_manifest

logger = logging.getLogger(__name__)

# Above this many candidate pairs we sample by rejection instead of enumerating
_ENUMERATION_LIMIT = 2_000_000


class EvolutionTraceGenerator:
    """Generates reproducible base + delta traces.

    Pairs (src, dst) carry at most one weight at a time. Deletions are drawn
    uniformly from the current edge set, additions uniformly from pairs
    absent in the current snapshot.
    """

    def __init__(self, num_vertices: int, seed: int, config: Optional[GeneratorConfig] = None):
        """Initialize the generator.

        Args:
            num_vertices: Size of the vertex universe
            seed: Seed for numpy's default generator
            config: Weight range and re-add policy
        """
        if num_vertices < 1:
            raise ConfigurationError("a trace needs at least one vertex")
        self.num_vertices = num_vertices
        self.config = config or GeneratorConfig()
        self.rng = np.random.default_rng(seed)
        self._first_weight: Dict[int, float] = {}

    @property
    def possible_pairs(self) -> int:
        n = self.num_vertices
        return n * n if self.config.allow_self_loops else n * (n - 1)

    def _valid_codes(self) -> np.ndarray:
        codes = np.arange(self.num_vertices * self.num_vertices, dtype=np.int64)
        if not self.config.allow_self_loops:
            codes = codes[codes // self.num_vertices != codes % self.num_vertices]
        return codes

    def _sample_absent(self, present: Set[int], k: int) -> List[int]:
        if k == 0:
            return []
        absent = self.possible_pairs - len(present)
        if k > absent:
            raise ConfigurationError(f"cannot add {k} edges: only {absent} vertex pairs are free")

        if self.num_vertices * self.num_vertices <= _ENUMERATION_LIMIT or absent < 4 * k:
            codes = self._valid_codes()
            if present:
                codes = codes[~np.isin(codes, np.fromiter(present, dtype=np.int64, count=len(present)))]
            return sorted(self.rng.choice(codes, size=k, replace=False).tolist())

        chosen: Set[int] = set()
        while len(chosen) < k:
            draw = self.rng.integers(0, self.num_vertices * self.num_vertices, size=2 * (k - len(chosen)))
            for code in draw.tolist():
                if code in present or code in chosen:
                    continue
                if not self.config.allow_self_loops and code // self.num_vertices == code % self.num_vertices:
                    continue
                chosen.add(code)
                if len(chosen) == k:
                    break
        return sorted(chosen)

    def _weights_for(self, codes: List[int]) -> List[float]:
        drawn = self.rng.integers(self.config.weight_min, self.config.weight_max + 1, size=len(codes))
        weights = []
        for code, weight in zip(codes, drawn.tolist()):
            if self.config.restore_weight_on_readd and code in self._first_weight:
                weights.append(self._first_weight[code])
            else:
                weights.append(float(weight))
                self._first_weight.setdefault(code, float(weight))
        return weights

    def _triple(self, code: int, weight: float) -> EdgeTriple:
        return EdgeTriple(code // self.num_vertices, code % self.num_vertices, weight)

    def generate(
        self,
        num_edges: int,
        num_deltas: int,
        batch_size: int,
        add_fraction: float,
    ) -> Tuple[List[EdgeTriple], List[DeltaBatch]]:
        """Generate a base edge set and ``num_deltas`` transition batches.

        Args:
            num_edges: Edges in the base snapshot
            num_deltas: Number of transitions (snapshots = num_deltas + 1)
            batch_size: Updates per transition
            add_fraction: Share of each batch that are additions

        Returns:
            Tuple of (sorted base triples, delta batches)

        Raises:
            ConfigurationError: If the parameters are infeasible
        """
        if num_edges < 0 or num_deltas < 0 or batch_size < 0:
            raise ConfigurationError("edge count, snapshot count and batch size must be non-negative")
        if not 0.0 <= add_fraction <= 1.0:
            raise ConfigurationError(f"add_fraction must lie in [0, 1], got {add_fraction}")
        if batch_size > num_edges:
            raise ConfigurationError(f"batch size {batch_size} exceeds the edge count {num_edges}")
        if num_edges > self.possible_pairs:
            raise ConfigurationError(
                f"{num_edges} edges do not fit on {self.num_vertices} vertices "
                f"({self.possible_pairs} possible pairs)"
            )

        # Halves round up: one update at 0.5 is an addition
        num_additions = int(batch_size * add_fraction + 0.5)
        num_deletions = batch_size - num_additions

        base_codes = self._sample_absent(set(), num_edges)
        current: Dict[int, float] = dict(zip(base_codes, self._weights_for(base_codes)))
        base = sorted(self._triple(c, w) for c, w in current.items())

        deltas = []
        for index in range(1, num_deltas + 1):
            if num_deletions > len(current):
                raise ConfigurationError(
                    f"batch {index} needs {num_deletions} deletions but only {len(current)} edges remain"
                )
            present = set(current)
            ordered = np.fromiter(sorted(current), dtype=np.int64, count=len(current))
            deleted = sorted(self.rng.choice(ordered, size=num_deletions, replace=False).tolist()) if num_deletions else []
            added = self._sample_absent(present, num_additions)
            added_weights = self._weights_for(added)

            deletions = tuple(self._triple(c, current.pop(c)) for c in deleted)
            additions = tuple(self._triple(c, w) for c, w in zip(added, added_weights))
            current.update(zip(added, added_weights))
            deltas.append(DeltaBatch(additions, deletions))

        logger.info(
            f"Generated trace: {self.num_vertices} vertices, {num_edges} base edges, "
            f"{num_deltas} deltas of {num_additions}+/{num_deletions}-"
        )
        return base, deltas


def generate_evolving(
    num_vertices: int,
    num_edges: int,
    n: int,
    batch_size: int,
    add_fraction: float,
    seed: int,
    config: Optional[GeneratorConfig] = None,
) -> Tuple[List[EdgeTriple], List[DeltaBatch]]:
    """Functional wrapper around :class:`EvolutionTraceGenerator`."""
    generator = EvolutionTraceGenerator(num_vertices, seed, config)
    return generator.generate(num_edges, n, batch_size, add_fraction)


def write_trace(
    out_dir: Union[str, Path],
    num_vertices: int,
    base: List[EdgeTriple],
    deltas: List[DeltaBatch],
    info: Optional[str] = None,
) -> List[Path]:
    """Write base edge list, delta files and manifest into ``out_dir``.

    Returns:
        Paths written, manifest last
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(deltas))))

    written = []
    base_path = out / "base.txt"
    base_path.write_text(format_edge_list(base, header=f"base snapshot, {num_vertices} vertices"), encoding='utf-8')
    written.append(base_path)

    delta_names = []
    for index, delta in enumerate(deltas, start=1):
        name = f"delta_{index:0{width}d}.txt"
        (out / name).write_text(format_delta_batch(delta), encoding='utf-8')
        delta_names.append(name)
        written.append(out / name)

    manifest = Manifest(num_vertices=num_vertices, base=base_path.name, deltas=delta_names, info=info)
    written.append(write_manifest(manifest, out / "manifest.json"))
    return written
