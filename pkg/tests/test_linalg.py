from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcmcluster import ConvergenceError, kmeans, truncated_svd
from lcmcluster.linalg import all_singular_values, jacobi_svd


def binary(n, j, seed, p=0.3):
    return (np.random.default_rng(seed).random((n, j)) < p).astype(float)


def brute_kmeans2(X):
    """Exact 2-means cost over all nonempty bipartitions."""
    best = np.inf
    n = X.shape[0]
    for mask in product((0, 1), repeat=n - 1):
        labels = np.array((0,) + mask)
        if labels.all() or not labels.any():
            continue
        cost = sum(((X[labels == c] - X[labels == c].mean(axis=0)) ** 2).sum() for c in (0, 1))
        best = min(best, cost)
    return best


class TestJacobi:
    @pytest.mark.parametrize("shape", [(7, 4), (4, 7), (12, 12)])
    def test_reconstructs_and_orthonormal(self, shape):
        A = np.random.default_rng(0).standard_normal(shape)
        U, s, V = jacobi_svd(A)
        np.testing.assert_allclose(U @ np.diag(s) @ V.T, A, atol=1e-12)
        r = min(shape)
        np.testing.assert_allclose(U.T @ U, np.eye(r), atol=1e-12)
        np.testing.assert_allclose(V.T @ V, np.eye(r), atol=1e-12)
        assert np.all(np.diff(s) <= 0)

    def test_rank_deficient(self):
        A = np.outer(np.arange(1.0, 6.0), np.ones(4))
        _, s, _ = jacobi_svd(A)
        assert s[0] == pytest.approx(np.sqrt(55 * 4))
        assert np.all(s[1:] < 1e-12)


class TestTruncatedSVD:
    @pytest.mark.parametrize("method", ["gram", "randomized"])
    @pytest.mark.parametrize("shape", [(30, 12), (12, 30)])
    def test_matches_jacobi_oracle(self, method, shape):
        A = binary(*shape, seed=4)
        _, s_ref, _ = jacobi_svd(A)
        svd = truncated_svd(A, 4, method=method, random_state=1)
        np.testing.assert_allclose(svd.sigma, s_ref[:4], rtol=1e-9)
        resid = np.linalg.norm(A @ svd.v - svd.u * svd.sigma, axis=0)
        assert np.all(resid <= 1e-8 * s_ref[0])
        np.testing.assert_allclose(svd.u.T @ svd.u, np.eye(4), atol=1e-10)

    def test_paths_agree_on_subspace(self):
        A = binary(80, 40, seed=2)
        g = truncated_svd(A, 3, method="gram")
        r = truncated_svd(A, 3, method="randomized", random_state=0)
        np.testing.assert_allclose(g.sigma, r.sigma, rtol=1e-9)
        # same orientation after the sign convention
        np.testing.assert_allclose(np.abs(g.u.T @ r.u), np.eye(3), atol=1e-6)
        np.testing.assert_allclose(g.u, r.u, atol=1e-6)

    def test_randomized_path_on_large_input(self):
        A = binary(600, 520, seed=1)
        svd = truncated_svd(A, 3, random_state=0)
        ref = np.linalg.svd(A, compute_uv=False)[:3]
        np.testing.assert_allclose(svd.sigma, ref, rtol=1e-9)

    def test_deterministic_given_seed(self):
        A = binary(600, 520, seed=3)
        a = truncated_svd(A, 2, random_state=7)
        b = truncated_svd(A, 2, random_state=7)
        np.testing.assert_array_equal(a.u, b.u)

    def test_convergence_error_reports_residual(self):
        A = np.random.default_rng(0).standard_normal((60, 60))
        with pytest.raises(ConvergenceError) as info:
            truncated_svd(A, 5, method="randomized", tol=1e-14, max_iter=1, random_state=0)
        assert info.value.residual > 1e-14

    def test_rejects_bad_rank(self):
        with pytest.raises(ValueError):
            truncated_svd(np.ones((3, 4)), 5)

    def test_all_singular_values_sorted(self):
        s = all_singular_values(binary(40, 20, seed=5), 10)
        assert s.shape == (10,) and np.all(np.diff(s) <= 0)


class TestKMeans:
    @settings(max_examples=25, deadline=None, derandomize=True)
    @given(st.integers(4, 12), st.integers(0, 10**6))
    def test_exhaustive_two_means(self, n, seed):
        # Lloyd is a local method: never below the optimum, and it reaches it
        # once restarts are plentiful
        X = np.random.default_rng(seed).standard_normal((n, 2))
        best = brute_kmeans2(X)
        assert kmeans(X, 2, random_state=seed).objective >= best * (1 - 1e-12)
        assert kmeans(X, 2, n_init=200, random_state=seed).objective == pytest.approx(best, rel=1e-9)

    def test_labels_are_nearest_center(self):
        X = np.random.default_rng(1).standard_normal((200, 3))
        res = kmeans(X, 4, random_state=0, max_iter=2)
        d = ((X[:, None, :] - res.centers[None]) ** 2).sum(axis=2)
        np.testing.assert_array_equal(res.labels, d.argmin(axis=1))
        assert res.objective == pytest.approx(d.min(axis=1).sum())

    def test_separated_blobs(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(c, 0.1, (30, 2)) for c in (0, 5, 10)])
        res = kmeans(X, 3, random_state=1)
        assert len({tuple(np.unique(res.labels[i:i + 30])) for i in (0, 30, 60)}) == 3

    def test_duplicate_points_fill_all_clusters_when_possible(self):
        X = np.array([[0.0], [0.0], [0.0], [1.0], [2.0]])
        res = kmeans(X, 3, random_state=0)
        assert res.objective == pytest.approx(0.0)

    def test_reproducible(self):
        X = np.random.default_rng(2).standard_normal((50, 2))
        a, b = kmeans(X, 3, random_state=5), kmeans(X, 3, random_state=5)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((2, 1)), 3)


def test_more_restarts_never_worse():
    X = np.random.default_rng(6).standard_normal((60, 3))
    objs = [kmeans(X, 4, n_init=r, random_state=11).objective for r in (1, 3, 10)]
    assert objs[0] >= objs[1] >= objs[2]


def test_kmeans_on_projection_matches_embedding():
    A = binary(90, 45, seed=8)
    svd = truncated_svd(A, 3)
    a = kmeans(svd.u * svd.sigma, 3, random_state=2)
    b = kmeans(A @ svd.v, 3, random_state=2)
    assert abs(a.objective - b.objective) < 1e-8
