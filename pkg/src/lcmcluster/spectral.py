"""Spectral clustering of a binary response matrix."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_n_classes, check_responses, spawn_generators
from .linalg import KMeansResult, TruncatedSVD, kmeans, truncated_svd


@dataclass(frozen=True)
class SpectralFit:
    labels: np.ndarray
    embedding: np.ndarray
    svd: TruncatedSVD
    kmeans: KMeansResult

    @property
    def kmeans_objective(self):
        return self.kmeans.objective


def spectral_clustering(
    R,
    n_classes,
    *,
    n_init=10,
    max_iter=100,
    tol=1e-6,
    svd_tol=1e-8,
    random_state=None,
):
    """Cluster individuals by k-means on the singular-value-weighted embedding.

    Computes the rank-``n_classes`` SVD ``U S V^T`` of ``R`` and runs
    k-means on the rows of ``U S``. Classes left empty by k-means are not
    an error here; callers decide whether that counts as a failure.

    Parameters
    ----------
    R : array-like of shape (n_samples, n_items)
        Fully observed 0/1 responses.
    n_classes : int
    n_init, max_iter, tol
        k-means restarts, iteration cap and relative-decrease tolerance.
    svd_tol : float
        Residual tolerance forwarded to :func:`truncated_svd`.
    random_state : int, Generator or None

    Returns
    -------
    SpectralFit
    """
    R = check_responses(R)
    k = check_n_classes(n_classes)
    if k > min(R.shape):
        raise ValueError(f"n_classes={k} exceeds min(n_samples, n_items)={min(R.shape)}")
    svd_rng, km_rng = spawn_generators(random_state, 2)
    svd = truncated_svd(R, k, tol=svd_tol, random_state=svd_rng)
    embedding = svd.u * svd.sigma
    km = kmeans(embedding, k, n_init=n_init, max_iter=max_iter, tol=tol, random_state=km_rng)
    return SpectralFit(labels=km.labels, embedding=embedding, svd=svd, kmeans=km)
