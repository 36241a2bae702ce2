"""Perturbation bounds for low-rank matrix approximation, as executable checks."""

from .checkers import (
    CHECKERS,
    DEFAULT_KAPPA,
    HypothesisError,
    bound_tolerance,
    check_additive_svd_transfer,
    check_angle_lower,
    check_angle_upper,
    check_basis_perturbation,
    check_combined_theorem6,
    check_dimension_change,
    check_dominant_basis_perturbation,
    check_error_matrix,
    check_error_matrix_rank_k,
    check_matrix_additive,
    mirsky_gap,
)
from .dense_core import (
    EPS,
    LinAlgError,
    OrthonormalBasis,
    RankError,
    RankKApprox,
    SvdConvergenceError,
    SvdFactors,
    best_rank_k,
    complement_basis,
    orthonormalize,
    pseudoinverse,
    read_csv,
    singular_values,
    svd,
    truncate,
    write_csv,
)
from .harness import ConfigError, SuiteConfig, SuiteSummary, run_suite, verify_report
from .perturb_gen import (
    PerturbationSpec,
    SpectrumSpec,
    collapse_repeated_columns,
    column_sample_rescale,
    haar_basis,
    matrix_with_spectrum,
    perturb_basis,
    perturb_matrix,
)
from .reports import BoundReport
from .schatten import INF, SchattenIndex, schatten_norm
from .subspaces import (
    PrincipalAngles,
    Projector,
    cs_block_dims,
    principal_angles,
    projector_from_full_rank,
    projector_from_orthonormal,
    sin_theta_norm,
    verify_cs_identities,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CHECKERS",
    "ConfigError",
    "DEFAULT_KAPPA",
    "EPS",
    "HypothesisError",
    "INF",
    "LinAlgError",
    "OrthonormalBasis",
    "PerturbationSpec",
    "PrincipalAngles",
    "Projector",
    "RankError",
    "RankKApprox",
    "SchattenIndex",
    "SpectrumSpec",
    "SuiteConfig",
    "SuiteSummary",
    "SvdConvergenceError",
    "SvdFactors",
    "__version__",
    "best_rank_k",
    "bound_tolerance",
    "check_additive_svd_transfer",
    "check_angle_lower",
    "check_angle_upper",
    "check_basis_perturbation",
    "check_combined_theorem6",
    "check_dimension_change",
    "check_dominant_basis_perturbation",
    "check_error_matrix",
    "check_error_matrix_rank_k",
    "check_matrix_additive",
    "collapse_repeated_columns",
    "column_sample_rescale",
    "complement_basis",
    "cs_block_dims",
    "haar_basis",
    "matrix_with_spectrum",
    "mirsky_gap",
    "orthonormalize",
    "perturb_basis",
    "perturb_matrix",
    "principal_angles",
    "projector_from_full_rank",
    "projector_from_orthonormal",
    "pseudoinverse",
    "read_csv",
    "run_suite",
    "schatten_norm",
    "sin_theta_norm",
    "singular_values",
    "svd",
    "truncate",
    "verify_cs_identities",
    "verify_report",
    "write_csv",
]
