"""Spectral clustering with likelihood refinement for binary latent class models."""

from .core import (
    ModelInstance,
    generate_instance,
    hamming_loss,
    joint_log_likelihood,
    raw_disagreement,
    renyi_half,
    separation_delta,
    sigma_theta_sq,
    snr_istar,
)
from .estimators import CEM, SOLA, LatentClassEM, SOLAPlus, SpectralLCM, SplitSOLA
from .exceptions import ConvergenceError, EmptyClassError
from .linalg import all_singular_values, kmeans, truncated_svd
from .refine import (
    FitReport,
    align_permutation,
    assign_labels,
    cem,
    em_baseline,
    estimate_theta,
    make_split,
    oracle_classify,
    sola,
    sola_plus,
    sola_split,
)
from .select import beta_b_constant, diagnose, estimate_k, estimate_k_from_data, tau
from .spectral import spectral_clustering

__version__ = "0.1.0"
