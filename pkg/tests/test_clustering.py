import numpy as np
import pytest

from core.clustering import FcmModel, _fcm_centroids, fcm, fcm_memberships, kmeans, predict_hard
from core.errors import DataError


def _two_blobs(rng, n=20, gap=8.0):
    left = rng.normal(0.0, 1.0, size=(n, 2))
    right = rng.normal(gap, 1.0, size=(n, 2))
    return np.vstack([left, right])


class TestKMeans:

    def test_separates_two_blobs(self):
        data = _two_blobs(np.random.default_rng(0))

        model = kmeans(data, 2, seed=3)

        assert len(set(model.assignments[:20].tolist())) == 1
        assert len(set(model.assignments[20:].tolist())) == 1
        assert model.assignments[0] != model.assignments[-1]

    def test_inertia_never_increases(self):
        rng = np.random.default_rng(123)
        for run in range(100):
            n = int(rng.integers(5, 40))
            data = rng.normal(size=(n, int(rng.integers(1, 4))))
            k = int(rng.integers(1, min(n, 6) + 1))
            model = kmeans(data, k, seed=run)
            history = model.inertia_history
            assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
            assert model.inertia >= 0
            assert set(model.assignments.tolist()) <= set(range(k))

    def test_k_equals_n_gives_zero_inertia(self):
        data = np.random.default_rng(4).normal(size=(7, 3))

        model = kmeans(data, 7, seed=1)

        assert model.inertia == pytest.approx(0.0, abs=1e-12)

    def test_k_one_is_the_mean(self):
        data = np.random.default_rng(6).normal(size=(15, 2))

        model = kmeans(data, 1, seed=0)

        np.testing.assert_allclose(model.centroids[0], data.mean(axis=0))
        assert model.inertia == pytest.approx(float(((data - data.mean(axis=0)) ** 2).sum()))

    def test_same_seed_same_model(self):
        data = np.random.default_rng(9).normal(size=(30, 2))

        first = kmeans(data, 3, seed=5)
        second = kmeans(data, 3, seed=5)

        np.testing.assert_array_equal(first.centroids, second.centroids)
        assert first.assignments.tolist() == second.assignments.tolist()

    def test_explicit_init(self):
        data = np.array([[0.0], [1.0], [10.0], [11.0]])

        model = kmeans(data, 2, init=np.array([[0.0], [10.0]]))

        np.testing.assert_allclose(model.centroids.ravel(), [0.5, 10.5])
        assert model.assignments.tolist() == [0, 0, 1, 1]

    def test_restarts_never_worse_than_one_run(self):
        data = np.random.default_rng(31).normal(size=(40, 2))

        single = kmeans(data, 4, seed=2)
        several = kmeans(data, 4, seed=2, n_init=5)

        # the first restart draws the same initial centroids as the single run
        assert several.inertia <= single.inertia + 1e-12

    def test_invalid_k(self):
        data = np.zeros((3, 1))
        with pytest.raises(DataError):
            kmeans(data, 0)
        with pytest.raises(DataError, match="exceeds"):
            kmeans(data, 4)

    def test_no_empty_cluster_with_duplicate_rows(self):
        data = np.array([[0.0], [0.0], [0.0], [5.0], [5.0], [9.0]])

        model = kmeans(data, 3, seed=0)

        assert sorted(set(model.assignments.tolist())) == [0, 1, 2]


class TestFcmMemberships:

    def test_crisp_on_a_centroid(self):
        data = np.array([[0.0, 0.0], [1.0, 1.0]])
        centroids = np.array([[0.0, 0.0], [2.0, 2.0]])

        membership = fcm_memberships(data, centroids, 2.0)

        assert membership[0].tolist() == [1.0, 0.0]
        assert membership[1] == pytest.approx([0.5, 0.5])

    def test_coincident_centroids_share_membership(self):
        data = np.array([[3.0]])
        centroids = np.array([[3.0], [3.0], [7.0]])

        membership = fcm_memberships(data, centroids, 2.0)

        assert membership[0].tolist() == [0.5, 0.5, 0.0]

    def test_plain_distance_ratio(self):
        # d = 1 and 3 with m = 2: weights 1 and 1/3
        membership = fcm_memberships(np.array([[1.0]]), np.array([[0.0], [4.0]]), 2.0)

        assert membership[0] == pytest.approx([0.75, 0.25])

    def test_squared_distance_ratio(self):
        membership = fcm_memberships(np.array([[1.0]]), np.array([[0.0], [4.0]]), 2.0,
                                     squared_distances=True)

        assert membership[0] == pytest.approx([0.9, 0.1])

    def test_far_points_do_not_overflow(self):
        membership = fcm_memberships(np.array([[1e150]]), np.array([[0.0], [1.0]]), 1.05)

        assert np.all(np.isfinite(membership))
        assert membership.sum() == pytest.approx(1.0)


class TestFcm:

    def test_rows_sum_to_one_at_every_iteration(self):
        rng = np.random.default_rng(77)
        for run in range(50):
            n = int(rng.integers(3, 30))
            data = rng.normal(size=(n, int(rng.integers(1, 4))))
            c = int(rng.integers(1, min(n, 5) + 1))
            m = float(rng.uniform(1.2, 4.0))

            model = fcm(data, c, m=m, seed=run, max_iter=50, record_memberships=True)

            assert len(model.membership_history) >= 2
            for membership in model.membership_history:
                np.testing.assert_allclose(membership.sum(axis=1), 1.0, atol=1e-9)
                assert np.all(membership >= 0.0) and np.all(membership <= 1.0)

    def test_duplicate_points_stay_finite(self):
        data = np.array([[1.0, 1.0]] * 5 + [[4.0, 4.0]] * 5)

        model = fcm(data, 2, seed=0)

        assert np.all(np.isfinite(model.membership))
        np.testing.assert_allclose(model.membership.sum(axis=1), 1.0, atol=1e-9)

    def test_separates_two_blobs(self):
        data = _two_blobs(np.random.default_rng(1))

        model = fcm(data, 2, seed=4)
        hard = predict_hard(model, data)

        assert len(set(hard[:20].tolist())) == 1
        assert len(set(hard[20:].tolist())) == 1
        assert hard[0] != hard[-1]

    def test_memberships_soften_as_m_grows(self):
        data = _two_blobs(np.random.default_rng(2), gap=5.0)

        sharpness = [fcm(data, 2, m=m, seed=0).membership.max(axis=1).mean() for m in (1.25, 2.0, 10.0)]

        assert sharpness[0] > sharpness[1] > sharpness[2]

    def test_two_points_converge_to_themselves(self):
        data = np.array([[0.0], [10.0]])

        model = fcm(data, 2, m=2.0, seed=0, max_iter=100, tol=1e-12)

        np.testing.assert_allclose(np.sort(model.centroids[:, 0]), [0.0, 10.0], atol=0.1)
        assert model.membership[0].max() >= 0.99
        assert model.membership[1].max() >= 0.99

    def test_zero_weight_cluster_keeps_its_centroid(self):
        data = np.array([[0.0], [1.0]])
        membership = np.array([[1.0, 0.0], [1.0, 0.0]])

        centroids = _fcm_centroids(data, membership, 2.0, fallback=np.array([[9.0], [5.0]]))

        assert centroids[:, 0].tolist() == [0.5, 5.0]
        assert np.all(np.isfinite(_fcm_centroids(data, membership, 2.0)))

    def test_objective_is_recorded(self):
        data = _two_blobs(np.random.default_rng(3))

        model = fcm(data, 2, seed=0)

        assert len(model.objective_history) == model.iterations
        assert isinstance(model, FcmModel)
        assert model.to_dict()["c"] == 2

    def test_invalid_m(self):
        with pytest.raises(DataError):
            fcm(np.zeros((3, 1)), 2, m=1.0)

    def test_predict_dimension_mismatch(self):
        model = fcm(np.random.default_rng(0).normal(size=(6, 2)), 2, seed=0)

        with pytest.raises(DataError, match="dimensions"):
            predict_hard(model, np.zeros((2, 3)))
