"""Likelihood-based refinement of initial latent class labels.

The building blocks are the two coordinate-ascent steps of the joint
likelihood: :func:`estimate_theta` (class-wise column means) and
:func:`assign_labels` (per-individual argmax). :func:`sola`,
:func:`sola_plus` and :func:`cem` alternate them from a spectral start;
:func:`sola_split` does one cross-fitted step on two random halves.
:func:`em_baseline` maximises the marginal likelihood for comparison.
"""

import enum
import math
import time
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from ._validation import (
    EPS,
    as_generator,
    check_labels,
    check_n_classes,
    check_responses,
    check_theta,
    clamp_theta,
    spawn_generators,
)
from .core import MAX_ENUMERATED_CLASSES, class_log_likelihoods
from .exceptions import EmptyClassError
from .spectral import spectral_clustering

DEFAULT_STEPS = 10


class Failure(str, enum.Enum):
    NONE = "none"
    EMPTY_CLASS = "empty_class"
    NUMERIC = "numeric"


@dataclass
class FitReport:
    """Outcome of a refinement or EM fit.

    ``loglik_trace`` holds one objective value per completed step: the joint
    log-likelihood for SOLA/SOLA+, the proportion-augmented joint
    log-likelihood for CEM and the marginal log-likelihood for EM.
    ``initial_loglik`` is the objective at the starting labels with the first
    estimated parameters (None for EM).
    """

    labels: np.ndarray
    theta_hat: np.ndarray | None
    proportions: np.ndarray | None = None
    loglik_trace: list = field(default_factory=list)
    failure: Failure = Failure.NONE
    wall_time: float = 0.0
    initial_loglik: float | None = None
    init_labels: np.ndarray | None = None

    @property
    def failed(self):
        return self.failure is not Failure.NONE

    @property
    def n_steps(self):
        return len(self.loglik_trace)


@dataclass(frozen=True)
class SplitPlan:
    s1: np.ndarray
    s2: np.ndarray


# ------------------------------------------------------------ primitives


def estimate_theta(R, s, n_classes, eps=EPS):
    """Class-wise item means, clamped to ``[eps, 1 - eps]``.

    Raises
    ------
    EmptyClassError
        If some class in ``range(n_classes)`` has no members.
    """
    R = check_responses(R)
    s = check_labels(s, n_classes, n_samples=R.shape[0])
    counts = np.bincount(s, minlength=n_classes)
    if np.any(counts == 0):
        raise EmptyClassError(int(np.flatnonzero(counts == 0)[0]))
    sums = np.zeros((n_classes, R.shape[1]))
    np.add.at(sums, s, R)
    return clamp_theta((sums / counts[:, np.newaxis]).T, eps)


def class_proportions(s, n_classes):
    counts = np.bincount(s, minlength=n_classes)
    return counts / counts.sum()


def assign_labels(R, theta, log_prior=None, eps=EPS):
    """Assign each row to the class with the highest (prior-augmented) log-likelihood.

    Ties go to the lowest class index.
    """
    R = check_responses(R)
    T = check_theta(theta, n_items=R.shape[1])
    scores = class_log_likelihoods(R, T, eps)
    if log_prior is not None:
        log_prior = np.asarray(log_prior, dtype=np.float64)
        if log_prior.shape != (T.shape[1],):
            raise ValueError(f"log_prior must have shape ({T.shape[1]},)")
        scores = scores + log_prior
    return np.argmax(scores, axis=1)


def _objective(R, s, theta, log_prior, eps):
    scores = class_log_likelihoods(R, theta, eps)
    if log_prior is not None:
        scores = scores + log_prior
    return float(scores[np.arange(R.shape[0]), s].sum())


def _log_proportions(s, k):
    with np.errstate(divide="ignore"):
        return np.log(class_proportions(s, k))


# ------------------------------------------------------------ refinement


def _refine(R, k, init_labels, steps, use_prior, eps):
    labels = init_labels
    report = FitReport(labels=labels, theta_hat=None, init_labels=init_labels)
    for step in range(steps):
        try:
            theta = estimate_theta(R, labels, k, eps)
        except EmptyClassError:
            report.failure = Failure.EMPTY_CLASS
            break
        log_prior = _log_proportions(labels, k) if use_prior else None
        if step == 0:
            report.initial_loglik = _objective(R, labels, theta, log_prior, eps)
        new = assign_labels(R, theta, log_prior, eps)
        objective = _objective(R, new, theta, log_prior, eps)
        if not math.isfinite(objective):
            report.failure = Failure.NUMERIC
            break
        report.theta_hat = theta
        report.proportions = np.exp(log_prior) if use_prior else None
        report.loglik_trace.append(objective)
        unchanged = np.array_equal(new, labels)
        labels = new
        if unchanged:
            break
    report.labels = labels
    if not report.failed and np.unique(labels).size < k:
        report.failure = Failure.EMPTY_CLASS
    return report


def _spectral_start(R, k, random_state, spectral_kw):
    return spectral_clustering(R, k, random_state=random_state, **(spectral_kw or {})).labels


def sola_plus(
    R,
    n_classes,
    steps=DEFAULT_STEPS,
    *,
    use_prior=False,
    init_labels=None,
    random_state=None,
    eps=EPS,
    spectral_kw=None,
):
    """Spectral start followed by up to ``steps`` Maximization + Assignment rounds.

    Stops early once an assignment leaves the labels unchanged. With
    ``use_prior=True`` each assignment adds the log of the current class
    proportions (classification EM).

    Parameters
    ----------
    R : array-like of shape (n_samples, n_items)
    n_classes : int
    steps : int, default=10
    use_prior : bool, default=False
    init_labels : array-like, optional
        Starting labels; the spectral initialisation is skipped when given.
    random_state : int, Generator or None
        Seeds the spectral initialisation.
    eps : float
        Clamp for estimated item parameters.
    spectral_kw : dict, optional
        Extra keyword arguments for :func:`spectral_clustering`.

    Returns
    -------
    FitReport
    """
    start = time.perf_counter()
    R = check_responses(R)
    k = check_n_classes(n_classes)
    steps = check_n_classes(steps, "steps")
    if init_labels is None:
        init_labels = _spectral_start(R, k, random_state, spectral_kw)
    else:
        init_labels = check_labels(init_labels, k, n_samples=R.shape[0])
    report = _refine(R, k, init_labels, steps, use_prior, eps)
    report.wall_time = time.perf_counter() - start
    return report


def sola(R, n_classes, **kwargs):
    """Spectral start with one Maximization + Assignment step."""
    return sola_plus(R, n_classes, steps=1, **kwargs)


def cem(R, n_classes, steps=DEFAULT_STEPS, **kwargs):
    """Classification EM refinement: :func:`sola_plus` with a proportion prior."""
    return sola_plus(R, n_classes, steps=steps, use_prior=True, **kwargs)


# ------------------------------------------------------------ sample splitting


def make_split(n, seed=None):
    """Uniformly random partition of ``range(n)`` with ``|s1| = ceil(n/2)``."""
    n = check_n_classes(n, "n", minimum=4)
    perm = as_generator(seed).permutation(n)
    half = (n + 1) // 2
    return SplitPlan(s1=np.sort(perm[:half]), s2=np.sort(perm[half:]))


def align_permutation(theta_ref, theta_other):
    """Relabeling that best matches the columns of ``theta_other`` to ``theta_ref``.

    Returns ``perm`` minimising ``sum_c ||theta_ref[:, perm[c]] - theta_other[:, c]||^2``,
    the Frobenius distance between ``theta_ref`` and the column-permuted
    ``theta_other``. Labels expressed against ``theta_other`` map to labels
    against ``theta_ref`` via ``perm[labels]``.
    """
    A = check_theta(theta_ref)
    B = check_theta(theta_other, n_items=A.shape[0], n_classes=A.shape[1])
    k = A.shape[1]
    # cost[c, d]: squared distance between column c of B and column d of A
    cost = ((B[:, :, np.newaxis] - A[:, np.newaxis, :]) ** 2).sum(axis=0)
    if k <= MAX_ENUMERATED_CLASSES:
        perms = np.array(list(permutations(range(k))), dtype=np.int64)
        totals = cost[np.arange(k), perms].sum(axis=1)
        return perms[int(np.argmin(totals))]
    _, cols = linear_sum_assignment(cost)
    return cols.astype(np.int64)


def sola_split(
    R,
    n_classes,
    *,
    use_prior=False,
    random_state=None,
    eps=EPS,
    spectral_kw=None,
):
    """One-step refinement with sample splitting and label alignment.

    Each half is clustered spectrally and yields its own item parameters.
    Every half is then relabelled with the other half's parameters (and
    proportions, when ``use_prior``), so the two halves end up in different
    label spaces. The second half is mapped into the first half's space by
    the permutation aligning the two parameter matrices.
    """
    start = time.perf_counter()
    R = check_responses(R)
    k = check_n_classes(n_classes)
    if R.shape[0] < 2 * k:
        raise ValueError(f"need at least 2*n_classes={2 * k} samples, got {R.shape[0]}")
    split_rng, rng1, rng2 = spawn_generators(random_state, 3)
    plan = make_split(R.shape[0], split_rng)
    init = np.empty(R.shape[0], dtype=np.int64)
    halves = []
    try:
        for idx, rng in ((plan.s1, rng1), (plan.s2, rng2)):
            labels = _spectral_start(R[idx], k, rng, spectral_kw)
            init[idx] = labels
            theta = estimate_theta(R[idx], labels, k, eps)
            prior = _log_proportions(labels, k) if use_prior else None
            halves.append((theta, prior))
    except EmptyClassError:
        return FitReport(
            labels=init,
            theta_hat=None,
            failure=Failure.EMPTY_CLASS,
            wall_time=time.perf_counter() - start,
            init_labels=init,
        )
    (theta1, prior1), (theta2, prior2) = halves
    labels = np.empty(R.shape[0], dtype=np.int64)
    # first half in the label space of theta2, second half in that of theta1
    labels[plan.s1] = assign_labels(R[plan.s1], theta2, prior2, eps)
    to_space2 = align_permutation(theta2, theta1)
    labels[plan.s2] = to_space2[assign_labels(R[plan.s2], theta1, prior1, eps)]
    report = FitReport(labels=labels, theta_hat=None, init_labels=init)
    try:
        report.theta_hat = estimate_theta(R, labels, k, eps)
    except EmptyClassError:
        report.failure = Failure.EMPTY_CLASS
    else:
        log_prior = None
        if use_prior:
            report.proportions = class_proportions(labels, k)
            log_prior = np.log(report.proportions)
        report.loglik_trace.append(_objective(R, labels, report.theta_hat, log_prior, eps))
    report.wall_time = time.perf_counter() - start
    return report


# ------------------------------------------------------------ oracle and EM


def oracle_classify(R, theta_true, eps=EPS):
    """Likelihood-ratio classification with the true item parameters."""
    return assign_labels(R, theta_true, None, eps)


def _em_run(R, k, rng, max_iter, tol, eps):
    n = R.shape[0]
    resp = rng.dirichlet(np.ones(k), size=n)
    trace = []
    p = theta = None
    for _ in range(max_iter):
        nk = resp.sum(axis=0)
        if np.any(nk <= 1e-10 * n):
            return resp, p, theta, trace, Failure.EMPTY_CLASS
        p = nk / n
        theta = clamp_theta((R.T @ resp) / nk, eps)
        log_joint = class_log_likelihoods(R, theta, eps) + np.log(p)
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(log_norm.sum())
        if not math.isfinite(ll):
            return resp, p, theta, trace, Failure.NUMERIC
        resp = np.exp(log_joint - log_norm[:, np.newaxis])
        trace.append(ll)
        if len(trace) > 1 and trace[-1] - trace[-2] <= tol * abs(trace[-1]):
            break
    return resp, p, theta, trace, Failure.NONE


def em_baseline(R, n_classes, n_init=10, max_iter=1000, tol=1e-8, random_state=None, eps=EPS):
    """Marginal-likelihood EM for the latent class model with random restarts.

    Each restart starts from Dirichlet-random responsibilities. The restart
    with the largest final marginal log-likelihood is reported; labels are
    maximum-posterior classes. The fit is flagged ``empty_class`` when a
    component collapses or the labels use fewer than ``n_classes`` classes.
    """
    start = time.perf_counter()
    R = check_responses(R)
    k = check_n_classes(n_classes)
    best = None
    for rng in spawn_generators(random_state, check_n_classes(n_init, "n_init")):
        resp, p, theta, trace, failure = _em_run(R, k, rng, max_iter, tol, eps)
        score = trace[-1] if trace and failure is Failure.NONE else -np.inf
        if best is None or score > best[0]:
            best = (score, resp, p, theta, trace, failure)
    _, resp, p, theta, trace, failure = best
    labels = np.argmax(resp, axis=1)
    if failure is Failure.NONE and np.unique(labels).size < k:
        failure = Failure.EMPTY_CLASS
    return FitReport(
        labels=labels,
        theta_hat=theta,
        proportions=p,
        loglik_trace=trace,
        failure=failure,
        wall_time=time.perf_counter() - start,
    )


def em_posterior(R, theta, proportions, eps=EPS):
    """Posterior class probabilities under fitted EM parameters."""
    log_joint = class_log_likelihoods(R, theta, eps) + np.log(proportions)
    return np.exp(log_joint - logsumexp(log_joint, axis=1, keepdims=True))
