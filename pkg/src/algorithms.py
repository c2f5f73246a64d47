"""Monotonic path algorithms and the full fixpoint evaluator.

Each algorithm is a best-over-paths fold of an edge function that never
produces a value better than its input:

    =======  ========  ===========  ==========  ==================
    kind     better    source init  WORST       edge function
    =======  ========  ===========  ==========  ==================
    bfs      min       0            +inf        val + 1
    sssp     min       0            +inf        val + w   (w > 0)
    sswp     max       +inf         0           min(val, w)
    ssnp     min       0            +inf        max(val, w)
    viterbi  max       1.0          0.0         val / w   (w >= 1)
    =======  ========  ===========  ==========  ==================
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from src.exceptions import ConfigurationError, DomainError, SnapshotRangeError
from src.frontier import FrontierStats, propagate
from src.graph_model import Graph, ValueArray

logger = logging.getLogger(__name__)

INF = float('inf')


class AlgorithmKind(str, Enum):
    BFS = "bfs"
    SSSP = "sssp"
    SSWP = "sswp"
    SSNP = "ssnp"
    VITERBI = "viterbi"


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass(frozen=True)
class AlgorithmSpec:
    """A monotonic path algorithm.

    Attributes:
        kind: Which algorithm
        direction: Whether smaller or larger values are better
        init_source: Value of the source vertex
        init_other: WORST value, held by unreachable vertices
        min_weight: Smallest admissible edge weight
        min_weight_inclusive: Whether ``min_weight`` itself is admissible
        relax: Vectorized edge function f(val_u, w)
    """

    kind: AlgorithmKind
    direction: Direction
    init_source: float
    init_other: float
    min_weight: float
    min_weight_inclusive: bool
    relax: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @property
    def worst(self) -> float:
        return self.init_other

    @property
    def minimizing(self) -> bool:
        return self.direction is Direction.MINIMIZE

    def edge_function(self, values_u, weights):
        """Vectorized f(val_u, w); no domain check."""
        return self.relax(values_u, weights)

    def better(self, a, b):
        """True where ``a`` is strictly better than ``b``."""
        return a < b if self.minimizing else a > b

    def scatter_better(self, values: np.ndarray, targets: np.ndarray, candidates: np.ndarray) -> None:
        if self.minimizing:
            np.minimum.at(values, targets, candidates)
        else:
            np.maximum.at(values, targets, candidates)

    def weight_ok(self, weights):
        if self.min_weight_inclusive:
            return weights >= self.min_weight
        return weights > self.min_weight

    def describe_weight_domain(self) -> str:
        return f"w {'>=' if self.min_weight_inclusive else '>'} {self.min_weight:g}"

    def check_weights(self, weights: np.ndarray) -> None:
        """Raise DomainError if any weight lies outside this algorithm's domain."""
        weights = np.asarray(weights, dtype=np.float64)
        if weights.size == 0:
            return
        bad = ~self.weight_ok(weights)
        if bad.any():
            example = float(weights[np.argmax(bad)])
            raise DomainError(
                f"{self.kind.value} requires {self.describe_weight_domain()}; "
                f"found {int(bad.sum())} edge(s) outside, e.g. weight {example:g}"
            )


_SPECS = {
    AlgorithmKind.BFS: AlgorithmSpec(
        AlgorithmKind.BFS, Direction.MINIMIZE, 0.0, INF, 0.0, True,
        lambda val, w: val + 1.0,
    ),
    AlgorithmKind.SSSP: AlgorithmSpec(
        AlgorithmKind.SSSP, Direction.MINIMIZE, 0.0, INF, 0.0, False,
        lambda val, w: val + w,
    ),
    AlgorithmKind.SSWP: AlgorithmSpec(
        AlgorithmKind.SSWP, Direction.MAXIMIZE, INF, 0.0, 0.0, True,
        np.minimum,
    ),
    AlgorithmKind.SSNP: AlgorithmSpec(
        AlgorithmKind.SSNP, Direction.MINIMIZE, 0.0, INF, 0.0, True,
        np.maximum,
    ),
    AlgorithmKind.VITERBI: AlgorithmSpec(
        AlgorithmKind.VITERBI, Direction.MAXIMIZE, 1.0, 0.0, 1.0, True,
        lambda val, w: val / w,
    ),
}


def algorithm_spec(kind: Union[str, AlgorithmKind]) -> AlgorithmSpec:
    """Look up an algorithm by kind.

    Raises:
        ConfigurationError: If the kind is not recognized
    """
    try:
        return _SPECS[AlgorithmKind(kind.lower() if isinstance(kind, str) else kind)]
    except ValueError:
        known = ", ".join(k.value for k in AlgorithmKind)
        raise ConfigurationError(f"unknown algorithm '{kind}' (expected one of: {known})")


def edge_function(spec: AlgorithmSpec, val_u: float, w: float) -> float:
    """Scalar edge function with weight-domain check.

    Raises:
        DomainError: If w is outside the algorithm's weight domain
    """
    if not spec.weight_ok(w):
        raise DomainError(f"{spec.kind.value} requires {spec.describe_weight_domain()}, got {w}")
    return float(spec.relax(np.float64(val_u), np.float64(w)))


@dataclass(frozen=True)
class QueryContext:
    """An algorithm together with its source vertex."""
    spec: AlgorithmSpec
    source: int

    def initial_values(self, num_vertices: int) -> ValueArray:
        if not 0 <= self.source < num_vertices:
            raise SnapshotRangeError(f"source vertex {self.source} outside 0..{num_vertices - 1}")
        values = np.full(num_vertices, self.spec.init_other, dtype=np.float64)
        values[self.source] = self.spec.init_source
        return values

    def __str__(self) -> str:
        return f"{self.spec.kind.value}({self.source})"


def evaluate_full(
    g: Graph,
    q: QueryContext,
    threads: int = 1,
    stats: Optional[FrontierStats] = None,
) -> ValueArray:
    """Evaluate a query from scratch.

    Args:
        g: Graph to traverse
        q: Query (algorithm and source)
        threads: Worker threads per round
        stats: Optional counters to accumulate into

    Returns:
        The fixpoint value array
    """
    q.spec.check_weights(g.weights)
    values = q.initial_values(g.num_vertices)
    propagate([g], values, np.array([q.source], dtype=np.int64), q.spec, threads, stats)
    return values


def is_fixpoint(layers, values: ValueArray, spec: AlgorithmSpec) -> bool:
    """True if no edge of ``layers`` can improve ``values``."""
    for layer in layers:
        if layer.edge_count == 0:
            continue
        candidates = spec.edge_function(values[layer.sources()], layer.weights)
        if np.any(spec.better(candidates, values[layer.targets])):
            return False
    return True
