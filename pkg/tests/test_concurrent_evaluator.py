"""Tests for concurrent evaluation over the versioned graph."""

import numpy as np
import pytest

from src.algorithms import QueryContext, algorithm_spec, evaluate_full
from src.concurrent_evaluator import evaluate_concurrent, snapshot_has_edge
from src.exceptions import ConfigurationError, SnapshotRangeError
from src.graph_model import EdgeTriple, build_graph, build_versioned_graph
from src.trace_generator import generate_evolving
from src.ingest import materialize_snapshots, series_from_snapshots
from src.uvv_qrs import qrs_pipeline

from tests.conftest import ALGORITHMS


def _run(series, q, threads=1, layout="snapshot_major", unreduced=False):
    bundle = qrs_pipeline(series, q)
    vg = build_versioned_graph(bundle.qrs, [b.triples for b in bundle.reduced_batches])
    seeds = bundle.batches if unreduced else bundle.reduced_batches
    return evaluate_concurrent(vg, bundle.bootstrap, seeds, q, threads, layout)


class TestSnapshotHasEdge:
    """Test cases for reading snapshot ownership off a versioned edge."""

    def test_canonical_edges(self, canonical_series, sssp_from_zero):
        """Test that batch edges belong only to their own snapshot."""
        bundle = qrs_pipeline(canonical_series, sssp_from_zero)
        vg = build_versioned_graph(bundle.qrs, [b.triples for b in bundle.reduced_batches])
        (edge_03,) = vg.edges(0)
        (edge_23,) = vg.edges(2)
        assert snapshot_has_edge(edge_03, 0) and not snapshot_has_edge(edge_03, 1)
        assert snapshot_has_edge(edge_23, 1) and not snapshot_has_edge(edge_23, 0)

    def test_out_of_range(self, canonical_series, sssp_from_zero):
        """Test that asking for a snapshot past the count raises."""
        bundle = qrs_pipeline(canonical_series, sssp_from_zero)
        vg = build_versioned_graph(bundle.qrs, [b.triples for b in bundle.reduced_batches])
        with pytest.raises(SnapshotRangeError):
            snapshot_has_edge(vg.edges(0)[0], 2)


class TestEvaluateConcurrent:
    """Test cases for evaluating all snapshots at once."""

    def test_canonical_example(self, canonical_series, sssp_from_zero):
        """Test that the canonical example gives both snapshots' values."""
        result = _run(canonical_series, sssp_from_zero)
        assert len(result) == 2
        assert result[0].tolist() == [0, 1, 2, 5]
        assert result[1].tolist() == [0, 1, 2, 3]

    def test_witness_is_computed_correctly(self, witness_series, sssp_from_zero):
        """Test that an undetected unchanged vertex still gets the right values."""
        assert [r.tolist() for r in _run(witness_series, sssp_from_zero).arrays()] == [[0, 1, 10], [0, 2, 10]]

    @pytest.mark.parametrize("kind", ALGORITHMS)
    @pytest.mark.parametrize("layout", ["snapshot_major", "vertex_major"])
    def test_matches_full_evaluation(self, kind, layout):
        """Test that every algorithm and layout matches per-snapshot evaluation."""
        base, deltas = generate_evolving(60, 400, 6, 30, 0.5, seed=17)
        series = materialize_snapshots(base, deltas, 60)
        q = QueryContext(algorithm_spec(kind), 0)

        result = _run(series, q, layout=layout)
        for i in range(len(series)):
            assert np.array_equal(result[i], evaluate_full(series.graph(i), q))

    def test_unreduced_seeds_give_the_same_results(self):
        """Test that seeding from the full batches changes nothing."""
        base, deltas = generate_evolving(40, 200, 4, 20, 0.5, seed=2)
        series = materialize_snapshots(base, deltas, 40)
        q = QueryContext(algorithm_spec("sssp"), 0)
        reduced = _run(series, q).arrays()
        unreduced = _run(series, q, unreduced=True).arrays()
        assert all(np.array_equal(a, b) for a, b in zip(reduced, unreduced))

    def test_thread_count_does_not_change_results(self):
        """Test that four threads give the serial values and work count."""
        base, deltas = generate_evolving(1500, 9000, 5, 200, 0.5, seed=8)
        series = materialize_snapshots(base, deltas, 1500)
        q = QueryContext(algorithm_spec("bfs"), 0)
        serial = _run(series, q, threads=1)
        parallel = _run(series, q, threads=4)
        assert np.array_equal(serial.values, parallel.values)
        assert serial.edge_evaluations == parallel.edge_evaluations

    def test_telemetry(self, canonical_series, sssp_from_zero):
        """Test that each round records updates for every snapshot."""
        result = _run(canonical_series, sssp_from_zero)
        assert result.seed_evaluations == 2
        assert result.rounds == len(result.telemetry)
        for round_ in result.telemetry:
            assert len(round_.updates_per_snapshot) == 2

    def test_single_snapshot(self, sssp_from_zero):
        """Test that a one-snapshot series evaluates like a plain graph."""
        series = series_from_snapshots([{EdgeTriple(0, 1, 2.0), EdgeTriple(1, 2, 2.0)}], 3)
        assert _run(series, sssp_from_zero)[0].tolist() == [0, 2, 4]

    def test_batch_count_mismatch(self, sssp_from_zero):
        """Test that fewer seed batches than snapshots raises."""
        vg = build_versioned_graph(build_graph([], 4), [[], []])
        with pytest.raises(ConfigurationError):
            evaluate_concurrent(vg, np.zeros(4), [[]], sssp_from_zero)

    def test_bootstrap_size_mismatch(self, sssp_from_zero):
        """Test that a bootstrap of the wrong length raises."""
        vg = build_versioned_graph(build_graph([], 4), [[]])
        with pytest.raises(ConfigurationError):
            evaluate_concurrent(vg, np.zeros(3), [[]], sssp_from_zero)

    def test_unknown_layout(self, sssp_from_zero):
        """Test that an unknown value layout raises."""
        vg = build_versioned_graph(build_graph([], 2), [[]])
        with pytest.raises(ConfigurationError):
            evaluate_concurrent(vg, np.zeros(2), [[]], sssp_from_zero, layout="diagonal")
