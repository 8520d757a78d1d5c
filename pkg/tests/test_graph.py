import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebsbm.errors import DegeneratePartitionError
from ebsbm.graph import (
    BlockStats,
    Graph,
    Partition,
    block_counts,
    block_stats,
    compact_partition,
    expand_theta,
    induced_subgraph,
)
from helpers import brute_force_block_counts


def make(n, edges):
    return Graph(n=n, edges=frozenset(edges))


class TestGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            make(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            make(3, [(0, 3)])
        with pytest.raises(ValueError):
            make(3, [(2, 1)])

    def test_dedup_and_counts(self):
        g = make(4, [(0, 1), (0, 1), (2, 3)])
        assert g.edge_count == 2
        assert g.pair_count == 6
        assert g.density() == pytest.approx(2 / 6)

    def test_adjacency_symmetric(self):
        g = make(4, [(0, 1), (1, 3)])
        a = g.adjacency()
        assert np.array_equal(a, a.T)
        assert a[0, 1] == 1 and a[3, 1] == 1 and a[0, 3] == 0
        with pytest.raises(ValueError):
            a[0, 0] = 5  # read-only


class TestPartition:
    def test_sizes(self):
        p = Partition(labels=np.array([1, 1, 2, 2, 2]), K=2)
        assert np.array_equal(p.sizes, [2, 3])
        assert p.n == 5

    def test_empty_cluster_rejected(self):
        with pytest.raises(DegeneratePartitionError):
            Partition(labels=np.array([1, 1, 3]), K=3)

    def test_label_range_checked(self):
        with pytest.raises(ValueError):
            Partition(labels=np.array([0, 1]), K=2)
        with pytest.raises(ValueError):
            Partition(labels=np.array([1, 4]), K=3)

    def test_compact(self):
        p = compact_partition([7, 7, 2, 9])
        assert p.K == 3
        assert list(p.labels) == [2, 2, 1, 3]

    def test_equality(self):
        a = Partition.from_labels([1, 2, 1])
        b = Partition.from_labels([1, 2, 1])
        assert a == b and hash(a) == hash(b)


class TestBlockStats:
    def test_example_four_nodes(self):
        # oracle: exhaustive pair enumeration
        n, edges, labels = 4, [(0, 1), (0, 2), (2, 3)], [1, 1, 2, 2]
        ox, om = brute_force_block_counts(n, edges, labels)
        s = block_stats(make(n, edges), Partition.from_labels(labels))
        assert np.array_equal(s.edge_counts, ox)
        assert np.array_equal(s.pair_counts, om)
        assert np.array_equal(s.edge_counts, [[1, 1], [1, 1]])
        assert np.array_equal(s.pair_counts, [[1, 4], [4, 1]])

    def test_single_block(self):
        g = make(5, [(0, 1), (2, 4), (1, 3)])
        s = block_stats(g, Partition.from_labels([1] * 5))
        assert s.edge_counts[0, 0] == 3
        assert s.pair_counts[0, 0] == 10

    def test_empty_graph(self):
        g = make(6, [])
        s = block_stats(g, Partition.from_labels([1, 1, 2, 2, 3, 3]))
        assert s.edge_counts.sum() == 0
        assert np.array_equal(np.diag(s.pair_counts), [1, 1, 1])
        assert s.pair_counts[0, 1] == 4

    def test_singleton_cluster_zero_pairs(self):
        g = make(3, [(0, 1)])
        s = block_stats(g, Partition.from_labels([1, 1, 2]))
        assert s.pair_counts[1, 1] == 0
        assert s.edge_counts[1, 1] == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            block_stats(make(4, []), Partition.from_labels([1, 1, 2]))

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            BlockStats(K=1, edge_counts=np.array([[3]]), pair_counts=np.array([[2]]))
        with pytest.raises(ValueError):
            BlockStats(K=2, edge_counts=np.array([[0, 1], [0, 0]]),
                       pair_counts=np.array([[1, 2], [2, 1]]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 16), st.integers(0, 10_000), st.integers(1, 4))
    def test_total_edges_preserved_random(self, n, seed, K):
        rng = np.random.default_rng(seed)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        mask = rng.random(len(pairs)) < 0.4
        edges = [p for p, keep in zip(pairs, mask) if keep]
        labels = rng.integers(1, K + 1, size=n)
        part = compact_partition(labels)
        s = block_stats(make(n, edges), part)
        assert s.total_edges == len(edges)
        ox, om = brute_force_block_counts(n, edges, list(part.labels))
        assert np.array_equal(s.edge_counts, ox)
        assert np.array_equal(s.pair_counts, om)

    def test_relabel_within_cluster_invariant(self):
        rng = np.random.default_rng(5)
        n = 12
        labels = np.array([1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3])
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        edges = [p for p in pairs if rng.random() < 0.5]
        base = block_stats(make(n, edges), Partition.from_labels(labels))
        # swap two nodes of cluster 2 (nodes 4 and 7)
        perm = np.arange(n)
        perm[4], perm[7] = 7, 4
        new_edges = [(min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in edges]
        swapped = block_stats(make(n, new_edges), Partition.from_labels(labels[np.argsort(perm)]))
        assert np.array_equal(base.edge_counts, swapped.edge_counts)

    def test_block_counts_allows_empty_cluster(self):
        g = make(3, [(0, 1)])
        x, m = block_counts(g, np.array([0, 0, 0]), K=2)
        assert m[1, 1] == 0 and m[0, 1] == 0
        assert x[0, 0] == 1 and x.sum() == 1


class TestExpandTheta:
    def test_single_block(self):
        p = Partition.from_labels([1, 1, 1])
        out = expand_theta([[0.4]], p)
        off = out[~np.eye(3, dtype=bool)]
        assert np.all(off == 0.4)

    def test_two_nodes(self):
        p = Partition.from_labels([1, 2])
        out = expand_theta([[0.7, 0.2], [0.2, 0.9]], p)
        assert out[0, 1] == 0.2

    def test_hand_lookup(self):
        # oracle: element-by-element lookup
        p = Partition.from_labels([1, 1, 2])
        theta = np.array([[0.9, 0.1], [0.1, 0.5]])
        out = expand_theta(theta, p)
        expected = np.array([[theta[a - 1, b - 1] for b in (1, 1, 2)] for a in (1, 1, 2)])
        assert np.array_equal(out, expected)
        assert out[0, 1] == 0.9 and out[0, 2] == 0.1

    def test_block_constant_property(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(1, 4, size=30)
        p = compact_partition(labels)
        theta = np.array([[0.5, 0.1, 0.2], [0.1, 0.6, 0.3], [0.2, 0.3, 0.7]])[: p.K, : p.K]
        out = expand_theta(theta, p)
        for a in range(1, p.K + 1):
            for b in range(1, p.K + 1):
                ia = np.where(p.labels == a)[0]
                ib = np.where(p.labels == b)[0]
                vals = out[np.ix_(ia, ib)]
                assert np.all(vals == theta[a - 1, b - 1])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expand_theta([[0.5]], Partition.from_labels([1, 2]))


def test_induced_subgraph():
    g = make(5, [(0, 1), (1, 2), (3, 4), (0, 4)])
    sub, ids = induced_subgraph(g, [0, 1, 4])
    assert list(ids) == [0, 1, 4]
    assert sub.n == 3
    assert sub.edges == frozenset({(0, 1), (0, 2)})
