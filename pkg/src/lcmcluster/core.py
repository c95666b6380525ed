"""Model instances, clustering losses and divergence quantities.

Response matrices are ``(n_samples, n_items)`` arrays of 0/1, item
parameters are ``(n_items, n_classes)`` arrays and labels are 0-based
integer vectors.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._validation import (
    EPS,
    check_labels,
    check_n_classes,
    check_responses,
    check_theta,
    clamp_theta,
)

# Exhaustive permutation search is used up to this many classes.
MAX_ENUMERATED_CLASSES = 8
_HALF_BRANCH = 1e-8


@dataclass(frozen=True)
class ModelInstance:
    """A simulated latent class data set together with its ground truth."""

    labels: np.ndarray
    theta: np.ndarray
    responses: np.ndarray
    seed: int
    beta: tuple
    n_classes: int

    @property
    def n_samples(self):
        return self.responses.shape[0]

    @property
    def n_items(self):
        return self.responses.shape[1]


def generate_instance(n, j, k, beta_a, beta_b, seed=None):
    """Draw a latent class data set.

    Labels are uniform on the ``k`` classes, item parameters are i.i.d.
    ``Beta(beta_a, beta_b)`` and each response is Bernoulli with the
    parameter of the respondent's class.

    Parameters
    ----------
    n, j, k : int
        Number of individuals, items and classes. Requires ``n >= k >= 2``.
    beta_a, beta_b : float
        Positive Beta shape parameters.
    seed : int, optional

    Returns
    -------
    ModelInstance
    """
    k = check_n_classes(k, "k", minimum=2)
    n = check_n_classes(n, "n", minimum=k)
    j = check_n_classes(j, "j", minimum=1)
    if not (beta_a > 0 and beta_b > 0):
        raise ValueError("Beta parameters must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, size=n)
    theta = rng.beta(beta_a, beta_b, size=(j, k))
    responses = (rng.random((n, j)) < theta[:, labels].T).astype(np.float64)
    return ModelInstance(
        labels=labels,
        theta=theta,
        responses=responses,
        seed=seed,
        beta=(float(beta_a), float(beta_b)),
        n_classes=k,
    )


def _infer_n_classes(*label_vectors):
    return int(max(int(s.max()) for s in label_vectors if s.size) + 1)


def confusion_counts(s, s_star, n_classes):
    """``C[a, b]`` counts individuals with estimated label a and true label b."""
    C = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(C, (s, s_star), 1)
    return C


def best_matching(C):
    """Permutation ``perm`` maximising ``sum_b C[perm[b], b]``.

    Exhaustive for small ``C``; linear assignment otherwise.
    """
    k = C.shape[0]
    if k <= MAX_ENUMERATED_CLASSES:
        perms = np.array(list(permutations(range(k))), dtype=np.int64)
        scores = C[perms, np.arange(k)].sum(axis=1)
        return perms[int(np.argmax(scores))]
    rows, cols = linear_sum_assignment(C, maximize=True)
    perm = np.empty(k, dtype=np.int64)
    perm[cols] = rows
    return perm


def hamming_loss(s, s_star, n_classes=None):
    """Fraction of mislabelled individuals, minimised over relabelings.

    >>> hamming_loss([0, 0, 1], [1, 1, 1], n_classes=2)
    0.3333333333333333
    """
    s = check_labels(s, n_classes)
    s_star = check_labels(s_star, n_classes, n_samples=s.shape[0])
    if s.size == 0:
        raise ValueError("label vectors must be non-empty")
    if n_classes is None:
        n_classes = _infer_n_classes(s, s_star)
    C = confusion_counts(s, s_star, n_classes)
    perm = best_matching(C)
    matched = C[perm, np.arange(n_classes)].sum()
    return float((s.shape[0] - matched) / s.shape[0])


def raw_disagreement(s, s_star):
    """Un-permuted fraction of positions where the two label vectors differ."""
    s = check_labels(s)
    s_star = check_labels(s_star, n_samples=s.shape[0])
    if s.size == 0:
        raise ValueError("label vectors must be non-empty")
    return float(np.mean(s != s_star))


def _check_open_unit(x, name):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~np.isfinite(x)) or np.any((x <= 0.0) | (x >= 1.0)):
        raise ValueError(f"{name} must lie strictly inside (0, 1)")
    return x


def renyi_half(p, q):
    """Order-1/2 Rényi divergence between Bernoulli(p) and Bernoulli(q).

    Equal to ``-2 log(sqrt(pq) + sqrt((1-p)(1-q)))``. Evaluated through the
    squared Hellinger distance so that nearby arguments keep full relative
    precision. Accepts scalars or broadcastable arrays.
    """
    p = _check_open_unit(p, "p")
    q = _check_open_unit(q, "q")
    h2 = 0.5 * (
        (np.sqrt(p) - np.sqrt(q)) ** 2 + (np.sqrt(1.0 - p) - np.sqrt(1.0 - q)) ** 2
    )
    out = -2.0 * np.log1p(-h2)
    return float(out) if out.ndim == 0 else out


def _class_pairs(k):
    return [(a, b) for a in range(k) for b in range(a + 1, k)]


def pairwise_renyi(theta):
    """Symmetric ``(K, K)`` matrix of summed per-item Rényi-1/2 divergences."""
    T = check_theta(theta, open_interval=True)
    k = T.shape[1]
    D = np.zeros((k, k))
    for a, b in _class_pairs(k):
        D[a, b] = D[b, a] = np.sum(renyi_half(T[:, a], T[:, b]))
    return D


def snr_istar(theta):
    """Smallest summed Rényi-1/2 divergence over pairs of classes."""
    T = check_theta(theta, open_interval=True)
    if T.shape[1] < 2:
        raise ValueError("at least two classes are required")
    D = pairwise_renyi(T)
    return float(min(D[a, b] for a, b in _class_pairs(T.shape[1])))


def separation_delta(theta):
    """Minimum Euclidean distance between two columns of ``theta``."""
    T = check_theta(theta)
    if T.shape[1] < 2:
        raise ValueError("at least two classes are required")
    return float(
        min(np.linalg.norm(T[:, a] - T[:, b]) for a, b in _class_pairs(T.shape[1]))
    )


def sigma_theta_sq(theta_val):
    """Optimal sub-Gaussian variance proxy of a centred Bernoulli(theta).

    ``(1 - 2θ) / (2 log((1 - θ)/θ))``, with the removable singularity at
    1/2 filled by its limit 1/4.
    """
    x = _check_open_unit(theta_val, "theta")
    near_half = np.abs(x - 0.5) < _HALF_BRANCH
    safe = np.where(near_half, 0.25, x)
    out = np.where(
        near_half, 0.25, (1.0 - 2.0 * safe) / (2.0 * np.log((1.0 - safe) / safe))
    )
    return float(out) if out.ndim == 0 else out


def class_log_likelihoods(R, theta, eps=EPS):
    """Per-individual, per-class Bernoulli log-likelihood, shape (N, K)."""
    T = clamp_theta(theta, eps)
    return R @ np.log(T) + (1.0 - R) @ np.log1p(-T)


def joint_log_likelihood(R, s, theta, eps=EPS):
    """Joint log-likelihood of labels ``s`` and item parameters ``theta``.

    Item parameters are clamped to ``[eps, 1 - eps]`` before use.
    """
    R = check_responses(R)
    T = check_theta(theta, n_items=R.shape[1])
    s = check_labels(s, T.shape[1], n_samples=R.shape[0])
    scores = class_log_likelihoods(R, T, eps)
    return float(scores[np.arange(R.shape[0]), s].sum())
