import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from oracles import oracle_mean_pairwise_distance
from semaug.diversity_batcher import (
    NO_CLUSTER,
    build_diverse_batches,
    build_random_batches,
    kmeans_fit,
    mean_pairwise_distance,
    read_batch_plan,
    write_batch_plan,
)


def blob_data(rng, centers, sigma=0.5, per_blob=100):
    points, labels = [], []
    for label, center in enumerate(centers):
        points.append(rng.normal(loc=center, scale=sigma, size=(per_blob, len(center))))
        labels.extend([label] * per_blob)
    return np.vstack(points), np.array(labels)


class TestKMeansFit:
    def test_every_point_its_own_cluster(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(6, 3))
        model = kmeans_fit(x, k=6, seed=1)
        assert model.inertia == pytest.approx(0.0, abs=1e-12)

    def test_single_cluster_centroid_is_mean(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 5))
        model = kmeans_fit(x, k=1, seed=2)
        np.testing.assert_allclose(model.centroids[0], x.mean(axis=0), atol=1e-6)

    def test_three_blobs_recovered(self):
        rng = np.random.default_rng(7)
        x, labels = blob_data(rng, [(0, 0), (10, 0), (0, 10)])
        model = kmeans_fit(x, k=3, seed=3)
        assert adjusted_rand_score(labels, model.assignments) == pytest.approx(1.0)

    def test_inertia_non_increasing(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            x = rng.normal(size=(rng.integers(10, 60), rng.integers(2, 6)))
            model = kmeans_fit(x, k=int(rng.integers(1, 6)), seed=trial, n_init=1)
            hist = model.inertia_history
            assert all(a >= b - 1e-9 for a, b in zip(hist, hist[1:]))

    def test_k_larger_than_n(self):
        with pytest.raises(ValueError):
            kmeans_fit(np.zeros((3, 2)), k=4, seed=0)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(50, 4))
        a = kmeans_fit(x, k=5, seed=9)
        b = kmeans_fit(x, k=5, seed=9)
        np.testing.assert_array_equal(a.assignments, b.assignments)
        np.testing.assert_array_equal(a.centroids, b.centroids)

    def test_assignments_in_range(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(30, 3))
        model = kmeans_fit(x, k=4, seed=0)
        assert model.assignments.min() >= 0
        assert model.assignments.max() < 4


class TestBatchPlans:
    def fit_blobs(self, seed=0, per_blob=8, k=4):
        rng = np.random.default_rng(seed)
        x, _ = blob_data(rng, [(0, 0), (20, 0), (0, 20), (20, 20)], per_blob=per_blob)
        return x, kmeans_fit(x, k=k, seed=seed)

    def test_batches_span_distinct_clusters(self):
        x, model = self.fit_blobs()
        plan = build_diverse_batches(model, batch_size=4, seed=1)
        for batch, clusters in zip(plan.batches, plan.clusters):
            if len(batch) == 4:
                assert len(set(clusters)) == 4

    def test_two_clusters_alternate(self):
        x = np.array([[0.0], [0.1], [0.2], [0.3], [10.0], [10.1], [10.2], [10.3]])
        model = kmeans_fit(x, k=2, seed=0)
        plan = build_diverse_batches(model, batch_size=2, seed=2)
        for clusters in plan.clusters:
            assert len(set(clusters)) == 2

    def test_single_cluster_matches_random_membership(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(10, 2))
        model = kmeans_fit(x, k=1, seed=0)
        diverse = build_diverse_batches(model, batch_size=3, seed=77)
        random_plan = build_random_batches(10, batch_size=3, seed=77)
        assert [sorted(b) for b in diverse.batches] == [
            sorted(b) for b in random_plan.batches
        ]

    def test_plan_is_permutation(self):
        x, model = self.fit_blobs(seed=4, per_blob=7)
        for plan in (
            build_diverse_batches(model, batch_size=5, seed=0),
            build_random_batches(28, batch_size=5, seed=0),
        ):
            assert sorted(plan.all_rows()) == list(range(28))

    def test_random_chunk_sizes(self):
        plan = build_random_batches(10, batch_size=3, seed=1)
        assert [len(b) for b in plan.batches] == [3, 3, 3, 1]
        assert all(c == NO_CLUSTER for batch in plan.clusters for c in batch)

    def test_random_single_batch(self):
        plan = build_random_batches(4, batch_size=4, seed=0)
        assert sorted(plan.batches[0]) == [0, 1, 2, 3]

    def test_random_deterministic(self):
        a = build_random_batches(20, 6, seed=5)
        b = build_random_batches(20, 6, seed=5)
        assert a.batches == b.batches

    def test_plan_round_trip(self, tmp_path):
        x, model = self.fit_blobs(seed=6)
        plan = build_diverse_batches(model, batch_size=4, seed=9)
        path = tmp_path / "plan.jsonl"
        write_batch_plan(plan, path)
        loaded = read_batch_plan(path)
        assert loaded.batches == plan.batches
        assert loaded.clusters == plan.clusters


class TestMeanPairwiseDistance:
    def test_identical_rows(self):
        feats = np.array([[1.0, 2.0], [1.0, 2.0]])
        assert mean_pairwise_distance(feats, [0, 1]) == 0.0

    def test_three_four_five_triangle(self):
        feats = np.array([[0.0, 0.0], [3.0, 4.0]])
        assert mean_pairwise_distance(feats, [0, 1]) == pytest.approx(5.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(21)
        feats = rng.normal(size=(8, 3))
        batch = [0, 3, 5]
        expected = oracle_mean_pairwise_distance([feats[i].tolist() for i in batch])
        assert mean_pairwise_distance(feats, batch) == pytest.approx(expected, rel=1e-12)

    def test_too_small_batch(self):
        with pytest.raises(ValueError):
            mean_pairwise_distance(np.zeros((3, 2)), [0])


class TestDiversityDirection:
    def test_diverse_batches_spread_wider_than_random(self):
        # two well-separated clusters: diverse plans should average a larger
        # within-batch pairwise distance than random plans across seeds
        gaps = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x, _ = blob_data(rng, [(0, 0), (12, 0)], sigma=1.0, per_blob=30)
            model = kmeans_fit(x, k=2, seed=seed)
            diverse = build_diverse_batches(model, batch_size=4, seed=seed)
            random_plan = build_random_batches(x.shape[0], batch_size=4, seed=seed)

            def plan_mpd(plan):
                vals = [
                    mean_pairwise_distance(x, b) for b in plan.batches if len(b) >= 2
                ]
                return float(np.mean(vals))

            gaps.append(plan_mpd(diverse) - plan_mpd(random_plan))
        assert np.mean(gaps) > 0
