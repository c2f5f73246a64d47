"""Tests for CSR graphs, version masks and the versioned graph."""

import numpy as np
import pytest

from src.exceptions import CapacityError, DomainError, GraphFormatError, SnapshotRangeError
from src.graph_model import (
    EdgeTriple,
    VersionMask,
    build_graph,
    build_versioned_graph,
    graph_from_arrays,
    mask_has_snapshot,
    words_for,
)


class TestGraph:
    """Test cases for the CSR graph."""

    def test_adjacency_is_sorted_and_deduplicated(self):
        """Test that adjacency lists are sorted by (dst, weight) and duplicates collapse."""
        g = build_graph([(1, 0, 2.0), (0, 2, 1.0), (0, 1, 3.0), (0, 1, 3.0), (0, 1, 1.0)], 3)

        assert g.edge_count == 4
        assert g.adjacency(0) == [(1, 1.0), (1, 3.0), (2, 1.0)]
        assert g.adjacency(1) == [(0, 2.0)]
        assert g.adjacency(2) == []

    def test_parallel_edges_with_different_weights_are_distinct(self):
        """Test that the same vertex pair with two weights gives two edges."""
        g = build_graph([(0, 1, 1.0), (0, 1, 2.0)], 2)
        assert g.edge_set() == {EdgeTriple(0, 1, 1.0), EdgeTriple(0, 1, 2.0)}

    def test_sources_align_with_targets(self):
        """Test that sources() lines up with the targets array."""
        g = build_graph([(2, 0, 1.0), (0, 1, 1.0), (0, 2, 4.0)], 3)
        assert list(zip(g.sources().tolist(), g.targets.tolist())) == [(0, 1), (0, 2), (2, 0)]

    def test_arrays_are_read_only(self):
        """Test that the CSR arrays cannot be written."""
        g = build_graph([(0, 1, 1.0)], 2)
        with pytest.raises(ValueError):
            g.weights[0] = 5.0

    def test_vertex_out_of_range(self):
        """Test that a vertex outside the universe is rejected."""
        with pytest.raises(GraphFormatError):
            build_graph([(0, 3, 1.0)], 3)

    def test_negative_weight(self):
        """Test that negative weights are rejected."""
        with pytest.raises(DomainError):
            build_graph([(0, 1, -1.0)], 2)

    def test_graph_without_edges(self):
        """Test that an empty triple set gives all-zero offsets."""
        g = build_graph([], 5)
        assert g.edge_count == 0
        assert g.offsets.tolist() == [0] * 6

    def test_graph_from_arrays_matches_build_graph(self):
        """Test that building from arrays and from triples gives the same edges."""
        triples = [(0, 1, 2.0), (1, 2, 1.0), (0, 1, 2.0)]
        src, dst, w = zip(*triples)
        assert graph_from_arrays(3, np.array(src), np.array(dst), np.array(w)).edge_set() == \
            build_graph(triples, 3).edge_set()


class TestVersionMask:
    """Test cases for snapshot-ownership masks."""

    def test_string_form_puts_snapshot_zero_rightmost(self):
        """Test that the bit string is written with snapshot 0 on the right."""
        mask = VersionMask.from_snapshots([0, 3], 4)
        assert str(mask) == "1001"
        assert mask.snapshots() == [0, 3]

    def test_full_mask(self):
        """Test that only a mask with every snapshot set is full."""
        assert VersionMask.full(3).is_full
        assert not VersionMask.from_snapshots([0, 1], 3).is_full

    def test_has_snapshot(self):
        """Test that mask_has_snapshot reads single bits."""
        mask = VersionMask.from_snapshots([1], 2)
        assert mask_has_snapshot(mask, 1)
        assert not mask_has_snapshot(mask, 0)

    def test_has_snapshot_out_of_range(self):
        """Test that asking for a snapshot past the count raises."""
        with pytest.raises(SnapshotRangeError):
            mask_has_snapshot(VersionMask.full(2), 2)

    def test_masks_span_several_words(self):
        """Test that snapshots past 63 land in the second word."""
        assert words_for(64) == 1
        assert words_for(65) == 2
        mask = VersionMask.from_snapshots([0, 64, 127], 128)
        assert len(mask.words) == 2
        assert mask_has_snapshot(mask, 64)
        assert mask_has_snapshot(mask, 127)
        assert not mask_has_snapshot(mask, 63)

    def test_bits_beyond_snapshot_count(self):
        """Test that set bits above the snapshot count are rejected."""
        with pytest.raises(SnapshotRangeError):
            VersionMask.from_bits(0b100, 2)


class TestVersionedGraph:
    """Test cases for the versioned graph."""

    def test_common_edges_come_first(self):
        """Test that shared edges precede batch edges in each adjacency."""
        qrs = build_graph([(0, 3, 9.0)], 4)
        batches = [[(0, 2, 1.0)], [(0, 1, 1.0)]]
        vg = build_versioned_graph(qrs, batches)

        edges = vg.edges(0)
        assert [e.dst for e in edges] == [3, 1, 2]
        assert vg.common_counts[0] == 1
        assert str(edges[0].mask) == "11"
        assert str(edges[1].mask) == "10"
        assert str(edges[2].mask) == "01"

    def test_edge_in_every_batch_counts_as_common(self):
        """Test that a batch edge owned by every snapshot gets a full mask."""
        vg = build_versioned_graph(build_graph([], 2), [[(0, 1, 1.0)], [(0, 1, 1.0)]])
        assert vg.common_counts[0] == 1
        assert vg.edge_mask(0).is_full

    def test_snapshot_edge_sets_are_reproduced(self):
        """Test that each snapshot's edges are the shared graph plus its batch."""
        qrs = build_graph([(0, 1, 1.0), (1, 2, 2.0)], 3)
        batches = [[(2, 0, 1.0)], [], [(0, 2, 5.0), (2, 0, 1.0)]]
        vg = build_versioned_graph(qrs, batches)

        for i, batch in enumerate(batches):
            expected = qrs.edge_set() | {EdgeTriple(*t) for t in batch}
            assert vg.snapshot_edge_set(i) == expected

    def test_capacity_exceeded(self):
        """Test that more snapshots than mask bits raises CapacityError."""
        with pytest.raises(CapacityError):
            build_versioned_graph(build_graph([], 2), [[]] * 65, mask_capacity=64)

    def test_capacity_of_two_words(self):
        """Test that a 128-bit capacity holds 70 snapshots."""
        qrs = build_graph([(0, 1, 1.0)], 2)
        batches = [[] for _ in range(70)]
        batches[69] = [(1, 0, 1.0)]
        vg = build_versioned_graph(qrs, batches, mask_capacity=128)

        assert vg.num_words == 2
        assert vg.owned_by(69).tolist() == [True, True]
        assert vg.owned_by(3).tolist() == [True, False]

    def test_no_snapshots(self):
        """Test that a versioned graph needs at least one snapshot."""
        with pytest.raises(CapacityError):
            build_versioned_graph(build_graph([], 1), [])
