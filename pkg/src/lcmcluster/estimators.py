"""scikit-learn compatible estimators.

Each estimator takes a binary response matrix ``X`` of shape
``(n_samples, n_items)`` and exposes ``labels_`` after ``fit``.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import EPS, check_responses
from .linalg import _sq_distances
from .refine import DEFAULT_STEPS, assign_labels, em_baseline, em_posterior, sola_plus, sola_split
from .spectral import spectral_clustering


class SpectralLCM(TransformerMixin, ClusterMixin, BaseEstimator):
    """Spectral clustering of binary responses.

    Parameters
    ----------
    n_classes : int, default=2
    n_init : int, default=10
        k-means restarts.
    max_iter : int, default=100
    tol : float, default=1e-6
    random_state : int, Generator or None

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    embedding_ : ndarray of shape (n_samples, n_classes)
        Rows of ``U S`` from the truncated SVD.
    components_ : ndarray of shape (n_classes, n_items)
        Right singular vectors; ``transform(X) = X @ components_.T``.
    singular_values_ : ndarray of shape (n_classes,)
    cluster_centers_ : ndarray of shape (n_classes, n_classes)
    inertia_ : float
    """

    def __init__(self, n_classes=2, n_init=10, max_iter=100, tol=1e-6, random_state=None):
        self.n_classes = n_classes
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        fit = spectral_clustering(
            X,
            self.n_classes,
            n_init=self.n_init,
            max_iter=self.max_iter,
            tol=self.tol,
            random_state=self.random_state,
        )
        self.labels_ = fit.labels
        self.embedding_ = fit.embedding
        self.components_ = fit.svd.v.T
        self.singular_values_ = fit.svd.sigma
        self.cluster_centers_ = fit.kmeans.centers
        self.inertia_ = fit.kmeans.objective
        self.n_features_in_ = self.components_.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_

    def transform(self, X):
        check_is_fitted(self)
        return check_responses(X) @ self.components_.T

    def predict(self, X):
        """Nearest k-means center in the embedding space."""
        return np.argmin(_sq_distances(self.transform(X), self.cluster_centers_), axis=1)


class SOLA(ClusterMixin, BaseEstimator):
    """Spectral clustering followed by likelihood refinement.

    ``n_steps=1`` gives the one-step method. Larger values keep alternating
    Maximization + Assignment until the labels stop changing.
    ``use_prior=True`` adds log class proportions to each assignment
    (classification EM).

    Attributes
    ----------
    labels_, theta_, proportions_, loglik_trace_, failure_, init_labels_
    """

    def __init__(self, n_classes=2, n_steps=1, use_prior=False, eps=EPS, n_init=10,
                 random_state=None):
        self.n_classes = n_classes
        self.n_steps = n_steps
        self.use_prior = use_prior
        self.eps = eps
        self.n_init = n_init
        self.random_state = random_state

    def fit(self, X, y=None, init_labels=None):
        report = sola_plus(
            X,
            self.n_classes,
            steps=self.n_steps,
            use_prior=self.use_prior,
            init_labels=init_labels,
            random_state=self.random_state,
            eps=self.eps,
            spectral_kw={"n_init": self.n_init},
        )
        self._store(report)
        return self

    def _store(self, report):
        self.report_ = report
        self.labels_ = report.labels
        self.theta_ = report.theta_hat
        self.proportions_ = report.proportions
        self.loglik_trace_ = np.asarray(report.loglik_trace)
        self.failure_ = report.failure.value
        self.init_labels_ = report.init_labels
        if report.theta_hat is not None:
            self.n_features_in_ = report.theta_hat.shape[0]

    def predict(self, X):
        """Assign new rows with the fitted item parameters (and proportions)."""
        check_is_fitted(self, "theta_")
        if self.theta_ is None:
            raise ValueError(f"fit failed ({self.failure_}); no item parameters to predict with")
        prior = np.log(self.proportions_) if self.proportions_ is not None else None
        return assign_labels(X, self.theta_, prior, self.eps)


class SOLAPlus(SOLA):
    """:class:`SOLA` with ten refinement steps by default."""

    def __init__(self, n_classes=2, n_steps=DEFAULT_STEPS, use_prior=False, eps=EPS, n_init=10,
                 random_state=None):
        super().__init__(n_classes=n_classes, n_steps=n_steps, use_prior=use_prior, eps=eps,
                         n_init=n_init, random_state=random_state)


class CEM(SOLA):
    """Classification EM refinement: :class:`SOLA` with the proportion prior on."""

    def __init__(self, n_classes=2, n_steps=DEFAULT_STEPS, use_prior=True, eps=EPS, n_init=10,
                 random_state=None):
        super().__init__(n_classes=n_classes, n_steps=n_steps, use_prior=use_prior, eps=eps,
                         n_init=n_init, random_state=random_state)


class SplitSOLA(SOLA):
    """One-step refinement with sample splitting and label alignment."""

    def __init__(self, n_classes=2, use_prior=False, eps=EPS, n_init=10, random_state=None):
        super().__init__(n_classes=n_classes, n_steps=1, use_prior=use_prior, eps=eps,
                         n_init=n_init, random_state=random_state)

    def fit(self, X, y=None):
        report = sola_split(
            X,
            self.n_classes,
            use_prior=self.use_prior,
            random_state=self.random_state,
            eps=self.eps,
            spectral_kw={"n_init": self.n_init},
        )
        self._store(report)
        return self


class LatentClassEM(ClusterMixin, BaseEstimator):
    """Marginal-likelihood EM for binary latent class models.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    theta_ : ndarray of shape (n_items, n_classes)
    weights_ : ndarray of shape (n_classes,)
    loglik_trace_ : ndarray
        Marginal log-likelihood after each iteration of the best restart.
    failure_ : str
    """

    def __init__(self, n_classes=2, n_init=10, max_iter=1000, tol=1e-8, eps=EPS,
                 random_state=None):
        self.n_classes = n_classes
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.eps = eps
        self.random_state = random_state

    def fit(self, X, y=None):
        report = em_baseline(X, self.n_classes, n_init=self.n_init, max_iter=self.max_iter,
                             tol=self.tol, random_state=self.random_state, eps=self.eps)
        self.report_ = report
        self.labels_ = report.labels
        self.theta_ = report.theta_hat
        self.weights_ = report.proportions
        self.loglik_trace_ = np.asarray(report.loglik_trace)
        self.failure_ = report.failure.value
        self.n_features_in_ = check_responses(X).shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "theta_")
        return em_posterior(check_responses(X), self.theta_, self.weights_, self.eps)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)
