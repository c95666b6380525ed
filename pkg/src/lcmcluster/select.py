"""Choosing the number of classes and comparing error exponents."""

from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_responses, check_theta
from .core import (
    _HALF_BRANCH,
    _class_pairs,
    _check_open_unit,
    pairwise_renyi,
    separation_delta,
    sigma_theta_sq,
)
from .linalg import all_singular_values

THRESHOLD_FACTOR = 2.01
DEFAULT_CAP = 50


@dataclass(frozen=True)
class DiagnosticsReport:
    """Separation and signal summaries of an item-parameter matrix.

    ``spectral_exponent`` is ``delta**2 / (8 * sigma_bar**2)`` and
    ``oracle_exponent`` is ``istar / 2``; they are the exponents of the
    error rates of spectral clustering and of the optimal classifier.
    ``tau_min_proxy`` is the smallest pointwise tau over the entries of the
    class pair attaining ``istar``; it stands in for the weighted average
    and is only a proxy.
    """

    delta: float
    sigma_bar: float
    istar: float
    spectral_exponent: float
    oracle_exponent: float
    istar_pair: tuple
    beta_B: float | None = None
    tau_min_proxy: float | None = None

    def as_dict(self):
        return asdict(self)


def noise_threshold(n, j, factor=THRESHOLD_FACTOR):
    return factor * (np.sqrt(j) + np.sqrt(n))


def estimate_k(singular_values, n, j, factor=THRESHOLD_FACTOR):
    """Count singular values strictly above ``factor * (sqrt(j) + sqrt(n))``.

    >>> estimate_k([148.1, 64.4, 16.6], n=94, j=486)
    2
    """
    values = np.asarray(singular_values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("singular values must be a 1-d sequence")
    if np.any(values < 0) or np.any(np.diff(values) > 0):
        raise ValueError("singular values must be nonnegative and nonincreasing")
    return int(np.count_nonzero(values > noise_threshold(n, j, factor)))


def estimate_k_from_data(R, cap=DEFAULT_CAP, factor=THRESHOLD_FACTOR, **svd_kw):
    """Apply :func:`estimate_k` to the leading ``min(n, j, cap)`` singular values of ``R``."""
    R = check_responses(R)
    n, j = R.shape
    values = all_singular_values(R, min(n, j, cap), **svd_kw)
    return estimate_k(values, n, j, factor)


def beta_b_constant(a, b):
    """Constant ``a (a + b + a/(a + b)) / ((a + b)(a + b + 1))`` for Beta(a, b) item parameters."""
    if not (a > 0 and b > 0):
        raise ValueError("Beta parameters must be positive")
    s = a + b
    return float(a * (s + a / s) / (s * (s + 1.0)))


def tau(x):
    """``(1 - 2x) / (2x(1 - x) log((1 - x)/x))``, equal to 1 at x = 1/2."""
    x = _check_open_unit(x, "x")
    near_half = np.abs(x - 0.5) < _HALF_BRANCH
    safe = np.where(near_half, 0.25, x)
    out = np.where(
        near_half,
        1.0,
        (1.0 - 2.0 * safe) / (2.0 * safe * (1.0 - safe) * np.log((1.0 - safe) / safe)),
    )
    return float(out) if out.ndim == 0 else out


def diagnose(theta, beta_params=None):
    """Compute separation, signal-to-noise and exponent summaries for ``theta``.

    The two exponents are reported side by side; their ordering is not
    enforced since the comparison between them is asymptotic.
    """
    T = check_theta(theta, open_interval=True)
    if T.shape[1] < 2:
        raise ValueError("at least two classes are required")
    D = pairwise_renyi(T)
    pair = min(_class_pairs(T.shape[1]), key=lambda ab: D[ab])
    istar = float(D[pair])
    delta = separation_delta(T)
    sigma_bar = float(np.sqrt(np.max(sigma_theta_sq(T))))
    beta_B = beta_b_constant(*beta_params) if beta_params is not None else None
    return DiagnosticsReport(
        delta=delta,
        sigma_bar=sigma_bar,
        istar=istar,
        spectral_exponent=delta**2 / (8.0 * sigma_bar**2),
        oracle_exponent=istar / 2.0,
        istar_pair=tuple(int(c) for c in pair),
        beta_B=beta_B,
        tau_min_proxy=float(np.min(tau(T[:, list(pair)]))),
    )
