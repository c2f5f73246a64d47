"""Result files and statistics reports for evolving queries."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.evolving_query import EvolvingQueryEngine, QueryOutcome
from src.graph_model import ValueArray
from src.ingest import SnapshotSeries, VertexIdMap, format_number

logger = logging.getLogger(__name__)

QRS_PHASES = ("intersection_build", "union_build", "bounds", "reduction")


class BatchReduction(BaseModel):
    """Original and reduced size of one snapshot's addition batch."""
    snapshot: int
    original: int
    reduced: int

    @property
    def ratio(self) -> float:
        return self.reduced / self.original if self.original else 1.0


class RoundReport(BaseModel):
    round: int
    frontier_size: int
    edge_evaluations: int
    updates_per_snapshot: List[int]


class StatsReport(BaseModel):
    """Machine-readable summary of one query run.

    Fraction fields are relative to the vertex count, except
    ``qrs_edge_fraction`` which is relative to the intersection graph's edges.
    """
    model_config = ConfigDict(extra='forbid')

    algorithm: str
    source: str
    mode: str
    n: int = Field(..., ge=1)
    snapshot_indices: List[int]
    num_vertices: int
    wall_seconds: float
    evaluation_seconds: float
    qrs_generation: Dict[str, float] = Field(default_factory=dict)
    qrs_generation_seconds: float = 0.0
    unchanged_count: int
    unchanged_fraction: float
    uvv_count: Optional[int] = None
    uvv_fraction: Optional[float] = None
    uvv_recall: Optional[float] = None
    incremental_vertex_fraction: Optional[float] = None
    intersection_edges: Optional[int] = None
    union_edges: Optional[int] = None
    qrs_edges: Optional[int] = None
    qrs_edge_fraction: Optional[float] = None
    removed_intersection_edges: Optional[int] = None
    removed_batch_edges: Optional[int] = None
    batches: List[BatchReduction] = Field(default_factory=list)
    batch_reduction_ratios: List[float] = Field(default_factory=list)
    edge_evaluations: int = 0
    rounds: List[RoundReport] = Field(default_factory=list)


class WindowStats(BaseModel):
    """Unchanged-vertex measurements over the first ``window`` snapshots."""
    window: int
    unchanged_count: int
    unchanged_fraction: float
    uvv_count: int
    uvv_fraction: float
    uvv_recall: float


class WindowReport(BaseModel):
    algorithm: str
    source: str
    num_vertices: int
    windows: List[WindowStats]


class ModeBench(BaseModel):
    mode: str
    wall_seconds: float
    evaluation_seconds: float
    qrs_generation_seconds: float = 0.0
    edge_evaluations: int


class BenchReport(BaseModel):
    algorithm: str
    source: str
    n: int
    snapshot_indices: List[int]
    modes: List[ModeBench]
    qrs_generation: Dict[str, float] = Field(default_factory=dict)
    identical_results: bool


def unchanged_mask(results: Sequence[ValueArray]) -> np.ndarray:
    """Vertices whose value is identical in every result array."""
    stacked = np.vstack(results)
    return np.all(stacked == stacked[0], axis=0)


def uvv_recall(detected: int, unchanged: int) -> float:
    # Nothing unchanged means nothing could be missed
    return detected / unchanged if unchanged else 1.0


def _external_source(series: SnapshotSeries, source: int) -> str:
    id_map = series.id_map or VertexIdMap.identity(series.num_vertices)
    return id_map.external(source)


def build_stats_report(outcome: QueryOutcome, series: SnapshotSeries) -> StatsReport:
    """Summarize a query run; unchanged counts are measured on its results."""
    unchanged = unchanged_mask(outcome.results)
    unchanged_count = int(unchanged.sum())
    num_vertices = series.num_vertices
    qrs_generation = {
        phase: outcome.timings[f"qrs_{phase}"]
        for phase in QRS_PHASES if f"qrs_{phase}" in outcome.timings
    }

    report = StatsReport(
        algorithm=outcome.query.spec.kind.value,
        source=_external_source(series, outcome.query.source),
        mode=outcome.mode,
        n=len(outcome.results),
        snapshot_indices=outcome.snapshot_indices,
        num_vertices=num_vertices,
        wall_seconds=outcome.wall_seconds,
        evaluation_seconds=outcome.timings.get('evaluation', 0.0),
        qrs_generation=qrs_generation,
        qrs_generation_seconds=sum(qrs_generation.values()),
        unchanged_count=unchanged_count,
        unchanged_fraction=unchanged_count / num_vertices if num_vertices else 1.0,
        edge_evaluations=outcome.edge_evaluations,
    )

    stats = outcome.qrs_stats
    if stats is not None:
        report.uvv_count = stats.uvv_count
        report.uvv_fraction = stats.uvv_fraction
        report.uvv_recall = uvv_recall(stats.uvv_count, unchanged_count)
        report.incremental_vertex_fraction = 1.0 - stats.uvv_fraction
        report.intersection_edges = stats.intersection_edges
        report.union_edges = stats.union_edges
        report.qrs_edges = stats.qrs_edges
        report.qrs_edge_fraction = stats.qrs_edge_fraction
        report.removed_intersection_edges = stats.removed_intersection_edges
        report.removed_batch_edges = stats.removed_batch_edges
        report.batches = [
            BatchReduction(snapshot=index, original=original, reduced=reduced)
            for index, original, reduced in zip(
                outcome.snapshot_indices, stats.batch_sizes, stats.reduced_batch_sizes
            )
        ]
        report.batch_reduction_ratios = [b.ratio for b in report.batches]

    if outcome.concurrent is not None:
        report.rounds = [
            RoundReport(
                round=r.round,
                frontier_size=r.frontier_size,
                edge_evaluations=r.edge_evaluations,
                updates_per_snapshot=r.updates_per_snapshot,
            )
            for r in outcome.concurrent.telemetry
        ]
    return report


def measure_windows(engine: EvolvingQueryEngine, algorithm: str, source: int, sizes: Sequence[int]) -> WindowReport:
    """Unchanged fraction, detected UVV fraction and recall per window prefix.

    Raises:
        SnapshotRangeError: If a window size exceeds the available snapshots
    """
    series = engine.series
    windows = []
    for size in sizes:
        window_engine = EvolvingQueryEngine(series.window(0, size), engine.config, engine.threads)
        q = window_engine.query(algorithm, source)
        results = window_engine.run("full", q).results
        unchanged_count = int(unchanged_mask(results).sum())
        bundle = window_engine.build_qrs(q)
        num_vertices = series.num_vertices
        windows.append(WindowStats(
            window=size,
            unchanged_count=unchanged_count,
            unchanged_fraction=unchanged_count / num_vertices if num_vertices else 1.0,
            uvv_count=bundle.uvv.count,
            uvv_fraction=bundle.stats.uvv_fraction,
            uvv_recall=uvv_recall(bundle.uvv.count, unchanged_count),
        ))
        logger.info(
            f"Window {size}: {unchanged_count} unchanged, {bundle.uvv.count} detected"
        )
    return WindowReport(
        algorithm=algorithm.lower(),
        source=_external_source(series, source),
        num_vertices=series.num_vertices,
        windows=windows,
    )


def build_bench_report(outcomes: Sequence[QueryOutcome], series: SnapshotSeries) -> BenchReport:
    """Compare the timings and work of several modes on one query."""
    first = outcomes[0]
    modes, qrs_generation = [], {}
    for outcome in outcomes:
        generation = {
            phase: outcome.timings[f"qrs_{phase}"]
            for phase in QRS_PHASES if f"qrs_{phase}" in outcome.timings
        }
        if generation and not qrs_generation:
            qrs_generation = generation
        modes.append(ModeBench(
            mode=outcome.mode,
            wall_seconds=outcome.wall_seconds,
            evaluation_seconds=outcome.timings.get('evaluation', 0.0),
            qrs_generation_seconds=sum(generation.values()),
            edge_evaluations=outcome.edge_evaluations,
        ))
    identical = all(
        all(np.array_equal(a, b) for a, b in zip(o.results, first.results)) for o in outcomes[1:]
    )
    return BenchReport(
        algorithm=first.query.spec.kind.value,
        source=_external_source(series, first.query.source),
        n=len(first.results),
        snapshot_indices=first.snapshot_indices,
        modes=modes,
        qrs_generation=qrs_generation,
        identical_results=identical,
    )


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def format_result_file(
    values: ValueArray,
    algorithm: str,
    source: str,
    snapshot: int,
    id_map: Optional[VertexIdMap] = None,
) -> str:
    """One ``external_id value`` line per vertex, ascending external id."""
    id_map = id_map or VertexIdMap.identity(len(values))
    lines = [f"# algorithm={algorithm} source={source} snapshot={snapshot}"]
    for vertex in id_map.output_order(len(values)):
        lines.append(f"{id_map.external(vertex)} {format_number(float(values[vertex]))}")
    return "\n".join(lines) + "\n"


def write_result_files(out_dir: Union[str, Path], outcome: QueryOutcome, series: SnapshotSeries) -> List[Path]:
    """Write ``snapshot_<index>.txt`` for every snapshot of the outcome."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    algorithm = outcome.query.spec.kind.value
    source = _external_source(series, outcome.query.source)
    paths = []
    for index, values in zip(outcome.snapshot_indices, outcome.results):
        path = out / f"snapshot_{index}.txt"
        path.write_text(format_result_file(values, algorithm, source, index, series.id_map), encoding='utf-8')
        paths.append(path)
    logger.info(f"Wrote {len(paths)} result files to {out}")
    return paths


def write_json(report: BaseModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.model_dump(), indent=2) + "\n", encoding='utf-8')
    return path


def _fraction(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.1%}"


def render_table(report: StatsReport) -> str:
    """Human-readable summary printed after a query."""
    rows = [
        ("query", f"{report.algorithm}({report.source})"),
        ("mode", report.mode),
        ("snapshots", f"{report.n} ({report.snapshot_indices[0]}..{report.snapshot_indices[-1]})"),
        ("vertices", str(report.num_vertices)),
        ("wall time", f"{report.wall_seconds:.4f}s"),
        ("  qrs generation", f"{report.qrs_generation_seconds:.4f}s"),
        ("  evaluation", f"{report.evaluation_seconds:.4f}s"),
        ("unchanged", _fraction(report.unchanged_fraction)),
        ("uvv detected", _fraction(report.uvv_fraction)),
        ("uvv recall", _fraction(report.uvv_recall)),
        ("qrs edges / E∩", _fraction(report.qrs_edge_fraction)),
        ("edge evaluations", str(report.edge_evaluations)),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


def render_window_table(report: WindowReport) -> str:
    lines = [f"{'window':>8}  {'unchanged':>10}  {'uvv':>10}  {'recall':>8}"]
    for w in report.windows:
        lines.append(
            f"{w.window:>8}  {w.unchanged_fraction:>10.1%}  {w.uvv_fraction:>10.1%}  {w.uvv_recall:>8.1%}"
        )
    return "\n".join(lines)


def render_bench_table(report: BenchReport) -> str:
    lines = [f"{'mode':<12}{'wall':>10}{'qrs gen':>10}{'eval':>10}{'edge evals':>14}"]
    for m in report.modes:
        lines.append(
            f"{m.mode:<12}{m.wall_seconds:>9.4f}s{m.qrs_generation_seconds:>9.4f}s"
            f"{m.evaluation_seconds:>9.4f}s{m.edge_evaluations:>14}"
        )
    if report.qrs_generation:
        breakdown = ", ".join(f"{k} {v:.4f}s" for k, v in report.qrs_generation.items())
        lines.append(f"qrs generation: {breakdown}")
    lines.append(f"identical results: {'yes' if report.identical_results else 'NO'}")
    return "\n".join(lines)
