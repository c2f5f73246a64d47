"""Tests for bounds, unchanged-vertex detection and graph reduction."""

import numpy as np
import pytest

from src.algorithms import QueryContext, algorithm_spec
from src.config import EngineConfig
from src.exceptions import PreconditionError
from src.graph_model import EdgeTriple, build_graph
from src.ingest import AdditionBatch, build_intersection, build_union, series_from_snapshots
from src.uvv_qrs import (
    UvvSet,
    compute_bounds,
    detect_uvv,
    qrs_pipeline,
    reduce_batches,
    reduce_intersection,
)

INF = float('inf')


class TestBounds:
    """Test cases for intersection/union bounds."""

    def test_canonical_bounds(self, canonical_series, sssp_from_zero):
        """Test that minimizing queries take the union result as the lower bound."""
        bounds = compute_bounds(build_intersection(canonical_series), build_union(canonical_series), sssp_from_zero)
        assert bounds.r_intersection.tolist() == [0, 1, 2, INF]
        assert bounds.r_union.tolist() == [0, 1, 2, 3]
        # Minimizing: union below, intersection above
        assert bounds.lower is bounds.r_union
        assert bounds.upper is bounds.r_intersection
        assert bounds.mapping == {"lower": "union", "upper": "intersection"}

    def test_maximizing_swaps_the_mapping(self, canonical_series):
        """Test that maximizing queries take the intersection result as the lower bound."""
        q = QueryContext(algorithm_spec("sswp"), 0)
        bounds = compute_bounds(build_intersection(canonical_series), build_union(canonical_series), q)
        assert bounds.lower is bounds.r_intersection
        assert bounds.upper is bounds.r_union

    @pytest.mark.parametrize("kind", ["bfs", "sssp", "sswp", "ssnp", "viterbi"])
    def test_incremental_union_matches_from_scratch(self, witness_series, kind):
        """Test that the incremental union bound equals evaluating the union graph."""
        q = QueryContext(algorithm_spec(kind), 0)
        g_i, g_u = build_intersection(witness_series), build_union(witness_series)
        incremental = compute_bounds(g_i, g_u, q)
        scratch = compute_bounds(g_i, g_u, q, union_from_scratch=True)
        assert incremental.r_union.tolist() == scratch.r_union.tolist()

    def test_intersection_must_be_inside_union(self, sssp_from_zero):
        """Test that an intersection edge missing from the union raises."""
        with pytest.raises(PreconditionError):
            compute_bounds(build_graph([(0, 1, 1.0)], 2), build_graph([(0, 1, 2.0)], 2), sssp_from_zero)


class TestDetection:
    """Test cases for UVV detection."""

    def test_canonical_uvvs(self, canonical_series, sssp_from_zero):
        """Test that vertices 0, 1 and 2 are detected in the canonical example."""
        bounds = compute_bounds(build_intersection(canonical_series), build_union(canonical_series), sssp_from_zero)
        uvv = detect_uvv(bounds)
        assert uvv.vertices() == [0, 1, 2]
        assert 3 not in uvv
        assert len(uvv) == 3

    def test_unreachable_everywhere_is_unchanged(self, sssp_from_zero):
        """Test that a vertex unreachable in both graphs is detected."""
        g = build_graph([(0, 1, 1.0)], 3)
        bounds = compute_bounds(g, g, sssp_from_zero)
        assert 2 in detect_uvv(bounds)

    def test_witness_vertex_is_not_detected(self, witness_series, sssp_from_zero):
        """Test that an unchanged vertex with differing bounds is not detected."""
        bounds = compute_bounds(build_intersection(witness_series), build_union(witness_series), sssp_from_zero)
        assert bounds.r_intersection.tolist() == [0, INF, 11]
        assert bounds.r_union.tolist() == [0, 1, 9]
        assert detect_uvv(bounds).vertices() == [0]


class TestReduction:
    """Test cases for the reduced graph and batches."""

    def test_reduce_intersection_drops_in_edges_of_uvvs(self):
        """Test that in-edges of detected vertices are dropped."""
        g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 2, 3.0)], 3)
        uvv = UvvSet(np.array([False, False, True]))
        assert reduce_intersection(g, uvv).edge_set() == {EdgeTriple(0, 1, 1.0), EdgeTriple(2, 0, 1.0)}

    def test_reduce_batches_keeps_order(self):
        """Test that reduced batches keep their order and snapshot numbers."""
        uvv = UvvSet(np.array([False, True, False]))
        batches = [
            AdditionBatch(0, (EdgeTriple(2, 0, 1.0), EdgeTriple(0, 1, 1.0), EdgeTriple(1, 2, 1.0))),
            AdditionBatch(1, (EdgeTriple(2, 1, 4.0),)),
        ]
        reduced = reduce_batches(batches, uvv)
        assert reduced[0].triples == (EdgeTriple(2, 0, 1.0), EdgeTriple(1, 2, 1.0))
        assert reduced[1].triples == ()
        assert [b.snapshot for b in reduced] == [0, 1]


class TestPipeline:
    """Test cases for the end-to-end reduction."""

    def test_canonical_bundle(self, canonical_series, sssp_from_zero):
        """Test that the canonical bundle has the expected graph, seeds and counts."""
        bundle = qrs_pipeline(canonical_series, sssp_from_zero)

        assert bundle.qrs.edge_count == 0
        assert bundle.bootstrap.tolist() == [0, 1, 2, INF]
        assert [b.triples for b in bundle.reduced_batches] == [(EdgeTriple(0, 3, 5.0),), (EdgeTriple(2, 3, 1.0),)]
        assert bundle.stats.uvv_count == 3
        assert bundle.stats.uvv_fraction == 0.75
        assert bundle.stats.intersection_edges == 2
        assert bundle.stats.union_edges == 4
        assert bundle.stats.removed_intersection_edges == 2
        assert bundle.stats.removed_batch_edges == 0
        assert bundle.stats.qrs_edge_fraction == 0.0
        assert set(bundle.stats.timings) == {"intersection_build", "union_build", "bounds", "reduction"}

    def test_union_from_scratch_switch(self, canonical_series, sssp_from_zero):
        """Test that union_from_scratch detects the same vertices."""
        bundle = qrs_pipeline(canonical_series, sssp_from_zero, EngineConfig(union_from_scratch=True))
        assert bundle.uvv.vertices() == [0, 1, 2]

    def test_empty_intersection_fraction(self, sssp_from_zero):
        """Test that an empty intersection gives a zero edge fraction."""
        series = series_from_snapshots([{EdgeTriple(0, 1, 1.0)}, {EdgeTriple(0, 1, 2.0)}], 2)
        bundle = qrs_pipeline(series, sssp_from_zero)
        assert bundle.stats.intersection_edges == 0
        assert bundle.stats.qrs_edge_fraction == 0.0
