import io
import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from activecc.core import (Clustering, ObjectSet, PairError, SimilarityStore,
                           ValueRangeError, cost_delta, cost_r, violation)


def triple_store(s01, s02, s12):
    store = SimilarityStore(3)
    store.record(0, 1, s01)
    store.record(0, 2, s02)
    store.record(1, 2, s12)
    return store


def all_partitions(n):
    """Independent enumeration of set partitions as label vectors."""
    seen = set()
    for labels in itertools.product(range(n), repeat=n):
        canon = []
        mapping = {}
        for x in labels:
            mapping.setdefault(x, len(mapping))
            canon.append(mapping[x])
        seen.add(tuple(canon))
    return sorted(seen)


class TestObjectSet:
    def test_pair_count(self):
        assert ObjectSet(500).num_pairs == 124750

    def test_rejects_tiny(self):
        with pytest.raises(ValueError):
            ObjectSet(1)

    def test_pairs_enumeration(self):
        assert list(ObjectSet(3).pairs()) == [(0, 1), (0, 2), (1, 2)]


class TestSimilarityStore:
    def test_mean_of_two(self):
        store = SimilarityStore(2)
        store.record(0, 1, 1.0)
        store.record(0, 1, 0.0)
        assert store.estimate(0, 1) == 0.5

    def test_single_value(self):
        store = SimilarityStore(2)
        store.record(0, 1, 1.0)
        assert store.estimate(0, 1) == 1.0

    def test_mean_matches_direct_summation(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(-1, 1, size=57)
        store = SimilarityStore(2)
        for v in values:
            store.record(0, 1, float(v))
        expected = float(sum(values)) / len(values)
        assert abs(store.estimate(0, 1) - expected) < 1e-12

    def test_unknown_pair_is_zero(self):
        store = SimilarityStore(4)
        assert store.estimate(2, 3) == 0.0
        assert store.count(2, 3) == 0

    def test_symmetric_lookup(self):
        store = SimilarityStore(3)
        store.record(2, 0, -0.5)
        assert store.estimate(0, 2) == -0.5
        assert store.count(2, 0) == 1

    def test_self_pair_rejected(self):
        store = SimilarityStore(3)
        with pytest.raises(PairError):
            store.record(1, 1, 0.5)

    def test_out_of_range_value_rejected(self):
        store = SimilarityStore(3)
        with pytest.raises(ValueRangeError):
            store.record(0, 1, 1.5)

    def test_reset_pair_overwrites(self):
        store = SimilarityStore(3)
        store.record(0, 1, -1.0)
        store.record(0, 1, -1.0)
        store.reset_pair(0, 1, 0.25)
        assert store.estimate(0, 1) == 0.25
        assert store.count(0, 1) == 1

    @given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False),
                    min_size=1, max_size=20),
           st.randoms(use_true_random=False))
    def test_order_independent(self, values, rnd):
        store_a = SimilarityStore(2)
        for v in values:
            store_a.record(0, 1, v)
        shuffled = list(values)
        rnd.shuffle(shuffled)
        store_b = SimilarityStore(2)
        for v in shuffled:
            store_b.record(0, 1, v)
        assert abs(store_a.estimate(0, 1) - store_b.estimate(0, 1)) < 1e-12

    def test_serialization_round_trip(self):
        store = SimilarityStore(5)
        rng = np.random.default_rng(11)
        for _ in range(8):
            u, v = rng.choice(5, size=2, replace=False)
            store.record(int(u), int(v), float(rng.uniform(-1, 1)))
        buf = io.StringIO()
        store.dump(buf)
        buf.seek(0)
        loaded = SimilarityStore.load(buf)
        assert loaded.n == store.n
        assert sorted(loaded.entries()) == sorted(store.entries())


class TestClustering:
    def test_labels_compacted(self):
        c = Clustering.from_labels([5, 5, 9, 2])
        assert c.k == 3
        assert set(c.labels) == {0, 1, 2}

    def test_immutable(self):
        c = Clustering.from_labels([0, 1])
        with pytest.raises(ValueError):
            c.labels[0] = 1


class TestViolation:
    def test_agreeing_positive(self):
        store = triple_store(1.0, 1.0, -1.0)
        c = Clustering.from_labels([0, 0, 0])
        assert violation(store, 0, 1, c) == 0.0

    def test_negative_inside_cluster(self):
        store = triple_store(1.0, 1.0, -1.0)
        c = Clustering.from_labels([0, 0, 0])
        assert violation(store, 1, 2, c) == 1.0

    def test_zero_between_clusters(self):
        store = triple_store(1.0, 0.0, -1.0)
        c = Clustering.from_labels([0, 0, 1])
        assert violation(store, 0, 2, c) == 0.0

    @given(st.integers(0, 3), st.integers(0, 3))
    def test_symmetric(self, a, b):
        store = SimilarityStore(4)
        rng = np.random.default_rng(5)
        for u in range(4):
            for v in range(u + 1, 4):
                store.record(u, v, float(rng.uniform(-1, 1)))
        c = Clustering.from_labels([0, 0, 1, 1])
        if a != b:
            assert violation(store, a, b, c) == violation(store, b, a, c)


class TestCosts:
    def test_triple_min_cost_is_one(self):
        # inconsistent triple: putting everything together attains the minimum
        store = triple_store(1.0, 1.0, -1.0)
        assert cost_r(store, Clustering.from_labels([0, 0, 0])) == 1.0

    def test_triple_split_costs_three(self):
        store = triple_store(1.0, 1.0, -1.0)
        # oracle: enumerate all partitions of 3 objects, summing violations
        # directly from the definition
        by_partition = {}
        for labels in all_partitions(3):
            total = 0.0
            for u, v in [(0, 1), (0, 2), (1, 2)]:
                s = store.estimate(u, v)
                same = labels[u] == labels[v]
                if (same and s < 0) or (not same and s >= 0):
                    total += abs(s)
            by_partition[labels] = total
        assert by_partition[(0, 1, 1)] == 3.0
        assert cost_r(store, Clustering.from_labels([0, 1, 1])) == 3.0

    def test_all_zero_store(self):
        store = SimilarityStore(4)
        c = Clustering.from_labels([0, 1, 0, 1])
        assert cost_r(store, c) == 0.0
        assert cost_delta(store, c) == 0.0

    def test_delta_all_together(self):
        store = triple_store(1.0, 1.0, -1.0)
        assert cost_delta(store, Clustering.from_labels([0, 0, 0])) == -1.0

    def test_delta_singletons_zero(self):
        store = triple_store(1.0, 1.0, -1.0)
        assert cost_delta(store, Clustering.from_labels([0, 1, 2])) == 0.0

    @pytest.mark.parametrize("n,seed", [(4, 0), (5, 1), (6, 2), (7, 3)])
    def test_r_minus_delta_is_constant(self, n, seed):
        rng = np.random.default_rng(seed)
        store = SimilarityStore(n)
        for u in range(n):
            for v in range(u + 1, n):
                store.record(u, v, float(rng.uniform(-1, 1)))
        rows = [(u, v, store.estimate(u, v))
                for u in range(n) for v in range(u + 1, n)]
        expected = 0.5 * sum(abs(s) + s for _, _, s in rows)
        for labels in all_partitions(n):
            c = Clustering.from_labels(labels)
            assert cost_r(store, c) - cost_delta(store, c) == pytest.approx(
                expected, abs=1e-10)
