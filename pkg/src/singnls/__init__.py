"""Solver and verifier for stationary complex Schrodinger equations with a
singular sublinear absorption term, on 1-D intervals and 2-D rectangles."""

from .coefficients import (
    CoefficientTriple,
    CombinedBoundConstants,
    HypothesisReport,
    PotentialBoundConstants,
    TheoremId,
    check_existence_admissible_pair,
    check_existence_dissipative,
    check_existence_finite_measure,
    check_uniqueness,
    combined_bound_constants,
    in_admissible_set,
    potential_bound_constants,
    satisfies_pair_condition,
)
from .mesh import (
    BoundaryKind,
    Domain,
    DomainKind,
    Field,
    Grid,
    build_grid,
    discrete_laplacian,
    field_from_function,
    first_eigen_weight,
    boundary_distance_weight,
    h1_seminorm,
    interval,
    l2_norm,
    lp_norm,
    norms,
    poincare_constant,
    rectangle,
    zero_field,
)
from .nonlinearity import (
    NonlinearityParams,
    eval_nonlinearity,
    eval_truncated,
    monotonicity_pairing,
    pairing_constant_lower_bound,
)
from .solver import (
    Problem,
    SolveResult,
    SolverConfig,
    Symmetry,
    fixed_point_map,
    solve,
    solve_symmetric,
    uniqueness_probe,
)
from .bounds import (
    BoundCertificate,
    CertificateError,
    certify_finite_measure_bound,
    certify_pair_condition_bound,
    certify_potential_bound,
    energy_identities,
    support_measure,
)
from .weighted import (
    WeightConfig,
    WeightKind,
    hardy_check,
    make_weight_config,
    solve_weighted,
    weighted_l2,
    weighted_weak_residual,
)

__version__ = "0.1.0"
