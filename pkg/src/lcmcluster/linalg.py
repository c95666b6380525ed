"""Truncated SVD and k-means for the spectral stage.

Two SVD paths are provided. Small problems go through an eigendecomposition
of the Gram matrix of the smaller dimension followed by a Rayleigh-Ritz
correction. Larger ones use seeded randomized subspace iteration that runs
until a residual tolerance is met. ``jacobi_svd`` is a one-sided Jacobi
reference kept for cross-checking both.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_generator, check_n_classes, spawn_generators
from .exceptions import ConvergenceError

GRAM_MAX_DIM = 512
OVERSAMPLING = 10
POWER_ITERATIONS = 2


@dataclass(frozen=True)
class TruncatedSVD:
    """Leading singular triplets: ``R ≈ u @ diag(sigma) @ v.T``."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    objective: float
    n_iter: int


def _as_matrix(R):
    A = np.asarray(R, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite values")
    return A


def _flip_signs(u, v):
    # deterministic orientation: largest-magnitude entry of each u column positive
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs


def _ritz(A, basis):
    """Rayleigh-Ritz on the column space ``A @ basis``; returns (u, s, v)."""
    Q, T = np.linalg.qr(A @ basis)
    Ub, s, Wt = np.linalg.svd(T)
    return Q @ Ub, s, basis @ Wt.T


def _residuals(A, u, s, v):
    return np.linalg.norm(A @ v - u * s, axis=0)


def _gram_svd(A, k):
    n, j = A.shape
    if n >= j:
        _, vecs = np.linalg.eigh(A.T @ A)
        V = vecs[:, ::-1][:, :k]
        u, s, v = _ritz(A, V)
    else:
        _, vecs = np.linalg.eigh(A @ A.T)
        U = vecs[:, ::-1][:, :k]
        v, s, u = _ritz(A.T, U)
    return u, s, v


def _randomized_svd(A, k, tol, max_iter, rng):
    n, j = A.shape
    width = min(k + OVERSAMPLING, n, j)
    Q, _ = np.linalg.qr(A @ rng.standard_normal((j, width)))
    for _ in range(POWER_ITERATIONS):
        Q, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Q)
    worst = np.inf
    for _ in range(max_iter):
        Ub, s, Vt = np.linalg.svd(Q.T @ A, full_matrices=False)
        u, s, v = Q @ Ub[:, :k], s[:k], Vt[:k].T
        scale = s[0] if s[0] > 0 else 1.0
        active = s > tol * scale
        res = _residuals(A, u, s, v)
        worst = float(res[active].max() / scale) if active.any() else 0.0
        if worst <= tol:
            return u, s, v
        Q, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Q)
    raise ConvergenceError(
        f"randomized subspace iteration did not converge in {max_iter} iterations",
        worst,
    )


def truncated_svd(R, k, tol=1e-8, max_iter=200, random_state=None, method="auto"):
    """Top-``k`` singular triplets of ``R``.

    Parameters
    ----------
    R : array-like of shape (n, j)
    k : int
        Target rank, ``1 <= k <= min(n, j)``.
    tol : float, default=1e-8
        Relative residual bound: ``||R v_i - sigma_i u_i|| <= tol * sigma_1``
        for every triplet with ``sigma_i > tol * sigma_1``.
    max_iter : int, default=200
        Subspace iterations allowed on the randomized path.
    random_state : int, Generator or None
        Seeds the randomized path.
    method : {"auto", "gram", "randomized"}
        ``"auto"`` uses the Gram path when ``min(n, j) <= 512``.

    Returns
    -------
    TruncatedSVD

    Raises
    ------
    ConvergenceError
        If the residual bound is not reached.
    """
    A = _as_matrix(R)
    k = check_n_classes(k, "k")
    if k > min(A.shape):
        raise ValueError(f"k={k} exceeds min(n, j)={min(A.shape)}")
    if method == "auto":
        method = "gram" if min(A.shape) <= GRAM_MAX_DIM else "randomized"
    if method == "gram":
        u, s, v = _gram_svd(A, k)
        scale = s[0] if s[0] > 0 else 1.0
        active = s > tol * scale
        if active.any():
            worst = float(_residuals(A, u, s, v)[active].max() / scale)
            if worst > tol:
                raise ConvergenceError("Gram eigendecomposition lost accuracy", worst)
    elif method == "randomized":
        u, s, v = _randomized_svd(A, k, tol, max_iter, as_generator(random_state))
    else:
        raise ValueError(f"unknown method {method!r}")
    u, v = _flip_signs(u, v)
    return TruncatedSVD(u=u, sigma=s, v=v)


def all_singular_values(R, m, **kwargs):
    """Top-``m`` singular values of ``R`` in nonincreasing order."""
    return truncated_svd(R, m, **kwargs).sigma


def jacobi_svd(R, tol=1e-15, max_sweeps=60):
    """Full thin SVD by one-sided (Hestenes) Jacobi rotations.

    Orthogonalises the columns of the smaller-dimension orientation. Slow
    and exact; intended as an independent reference for tests.

    Returns
    -------
    u, sigma, v : ndarrays with ``R = u @ diag(sigma) @ v.T``
    """
    A = _as_matrix(R)
    transposed = A.shape[0] < A.shape[1]
    W = (A.T if transposed else A).copy()
    ncol = W.shape[1]
    V = np.eye(ncol)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(ncol - 1):
            for q in range(p + 1, ncol):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                sn = c * t
                wp = W[:, p].copy()
                W[:, p] = c * wp - sn * W[:, q]
                W[:, q] = sn * wp + c * W[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - sn * V[:, q]
                V[:, q] = sn * vp + c * V[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceError("Jacobi sweeps exhausted", np.nan)
    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    W, V = W[:, order], V[:, order]
    U = np.divide(W, sigma, out=np.zeros_like(W), where=sigma > 0)
    if transposed:
        U, V = V, U
    return U, sigma, V


# ---------------------------------------------------------------- k-means


def _sq_distances(X, centers):
    diff = X[:, np.newaxis, :] - centers[np.newaxis, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeans_plus_plus(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[c] = X[idx]
        closest = np.minimum(closest, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


def _update_centers(X, labels, centers, dist_to_own):
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k)
    new = centers.copy()
    nonempty = counts > 0
    sums = np.zeros_like(centers)
    np.add.at(sums, labels, X)
    new[nonempty] = sums[nonempty] / counts[nonempty, np.newaxis]
    empty = np.flatnonzero(~nonempty)
    if empty.size:
        # reseed each empty center at the currently worst-served point
        order = np.argsort(-dist_to_own, kind="stable")
        for c, idx in zip(empty, order):
            new[c] = X[idx]
    return new


def _lloyd(X, centers, max_iter, tol):
    prev = np.inf
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d = _sq_distances(X, centers)
        labels = np.argmin(d, axis=1)
        own = d[np.arange(X.shape[0]), labels]
        obj = float(own.sum())
        assert obj <= prev + 1e-9 * max(1.0, abs(prev)), "k-means objective increased"
        converged = np.isfinite(prev) and prev - obj <= tol * prev
        if converged or obj == 0.0 or n_iter == max_iter:
            break
        prev = obj
        centers = _update_centers(X, labels, centers, own)
    return labels, centers, obj, n_iter


def kmeans(points, k, n_init=10, max_iter=100, tol=1e-6, random_state=None):
    """Best-of-``n_init`` Lloyd's algorithm with k-means++ seeding.

    Each restart draws from its own child generator, so results do not
    depend on evaluation order. A run stops once the relative objective
    decrease drops below ``tol`` or after ``max_iter`` assignment steps.
    Returned labels are the nearest-center assignment (lowest index on
    ties) for the returned centers, and ``objective`` is their cost.
    Empty clusters are reseeded at the point farthest from its center.
    """
    X = _as_matrix(points)
    k = check_n_classes(k, "k")
    if X.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {X.shape[0]}")
    n_init = check_n_classes(n_init, "n_init")
    best = None
    for rng in spawn_generators(random_state, n_init):
        centers = _kmeans_plus_plus(X, k, rng)
        labels, centers, obj, n_iter = _lloyd(X, centers, max_iter, tol)
        if best is None or obj < best.objective:
            best = KMeansResult(labels=labels, centers=centers, objective=obj, n_iter=n_iter)
    return best
