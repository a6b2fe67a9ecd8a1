"""Brownian motion tree models on phylogenetic trees.

Covariance and concentration matrices of the model, their toric and
semialgebraic structure in Laplacian edge coordinates, exact trek-system
polynomial identities, and maximum likelihood estimation over the model
cone with boundary-face detection.
"""

from .covariance import (
    ConeLocation,
    PatternError,
    basis_matrix,
    cone_membership,
    farris_forward,
    farris_inverse,
    four_point_check,
    is_positive_definite,
    is_ultrametric,
    sigma_from_theta,
    simulate_sample_cov,
    theta_from_sigma,
    tree_metric,
)
from .mle import (
    ExperimentTable,
    MleResult,
    closed_form_n2,
    closed_form_n3,
    experiment,
    fit,
    grad_theta,
    loglik_k,
    loglik_sigma,
)
from .pcoords import k_from_p, p_adjoint_from_theta, p_from_k, toric_param_t
from .polynomials import Poly
from .toric import (
    Binomial,
    MembershipReport,
    exponent_matrix_rank,
    generators,
    residuals,
    semialgebraic_membership,
)
from .treks import (
    Trek,
    TrekSystem,
    adjugate_polynomials,
    binomial_positivity_certificate,
    dk_poly,
    euv_poly,
    trek_polynomial,
    trek_systems,
    verify_factorization,
)
from .trees import (
    QuartetTopology,
    RootedTree,
    TreeError,
    binary_tree_shapes,
    parse_tree,
    to_newick,
    tree_shapes,
    unit_theta,
)

__version__ = "0.1.0"

__all__ = [
    "Binomial",
    "ConeLocation",
    "ExperimentTable",
    "MembershipReport",
    "MleResult",
    "PatternError",
    "Poly",
    "QuartetTopology",
    "RootedTree",
    "Trek",
    "TreeError",
    "TrekSystem",
    "adjugate_polynomials",
    "basis_matrix",
    "binary_tree_shapes",
    "binomial_positivity_certificate",
    "closed_form_n2",
    "closed_form_n3",
    "cone_membership",
    "dk_poly",
    "euv_poly",
    "experiment",
    "exponent_matrix_rank",
    "farris_forward",
    "farris_inverse",
    "fit",
    "four_point_check",
    "generators",
    "grad_theta",
    "is_positive_definite",
    "is_ultrametric",
    "k_from_p",
    "loglik_k",
    "loglik_sigma",
    "p_adjoint_from_theta",
    "p_from_k",
    "parse_tree",
    "residuals",
    "semialgebraic_membership",
    "sigma_from_theta",
    "simulate_sample_cov",
    "theta_from_sigma",
    "to_newick",
    "toric_param_t",
    "tree_metric",
    "tree_shapes",
    "trek_polynomial",
    "trek_systems",
    "unit_theta",
    "verify_factorization",
]
