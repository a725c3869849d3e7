"""Independent component analysis with split generalized Gaussian marginals."""

from .density import (
    MultiSgg,
    UnivariateSgg,
    alpha_from_sigma,
    logistic_log_pdf,
    multi_sgg_log_pdf,
    sample_sgg,
    sgg_log_pdf,
    split_normal_log_pdf,
)
from .experiment import MixingExperiment, generate_sources, mix
from .gradients import GradientBundle, grad_profile_loglik, profile_loglik_and_grad
from .likelihood import (
    SuffStats,
    full_loglik,
    profile_loglik,
    reduced_objective_l,
    scale_estimators,
    sufficient_stats,
)
from .metrics import acy_error, match_components, tucker_congruence
from .optimizer import FitConfig, FitResult, fit_ica, separate
from .special import beta_of_c, digamma, ln_gamma
from .univariate import fit_univariate

__version__ = "0.1.0"
