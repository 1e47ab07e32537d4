"""Fundamental frequencies of planar quadratic-form p-Laplace operators:
exact form algebra, finite element solvers, and extremal-anisotropy search."""

from .quadform import (
    CLASS_ATOL,
    ClassTag,
    Decomposition,
    NegativeBetaError,
    NotPositiveDefiniteError,
    QuadForm,
    SpectralData,
    alpha_of_theta,
    classify,
    compose_rotation,
    decompose,
    make_Q_alpha,
    normalize,
    quant_lower_constant,
    quant_upper_bound,
    random_member,
    reflect_y,
    rotation_for_alpha,
    spectral,
    theta_of_alpha,
)
from .geometry import (
    Disk,
    DomainSpec,
    Polygon,
    Rectangle,
    area,
    domain_from_json,
    domain_to_json,
    lshape,
    named_domain,
    polygonize,
    rotate,
    shear_y,
)
from .mesh import (
    Mesh,
    build_mesh,
    interior_dof_map,
    min_angle,
    refine,
    triangulate,
    write_mesh_csv,
    write_nodal_values_csv,
)
from .solver import (
    EigenResult,
    SolverConvergenceError,
    SolverOptions,
    directional_constant,
    energy,
    lambda_anisotropic_two_routes,
    pnorm,
    pnorm_p,
    solve_p,
    solve_p2,
)
from .optimizer import (
    OptimizeResult,
    lambda_max,
    lambda_min,
    profile_value,
    run_verification,
    verify_Q0_limit,
    verify_disk,
    verify_quantitative,
    verify_rectangle,
    verify_rigidity,
)

__all__ = [
    "CLASS_ATOL",
    "ClassTag",
    "Decomposition",
    "Disk",
    "DomainSpec",
    "EigenResult",
    "Mesh",
    "NegativeBetaError",
    "NotPositiveDefiniteError",
    "OptimizeResult",
    "Polygon",
    "QuadForm",
    "Rectangle",
    "SolverConvergenceError",
    "SolverOptions",
    "SpectralData",
    "alpha_of_theta",
    "area",
    "build_mesh",
    "classify",
    "compose_rotation",
    "decompose",
    "directional_constant",
    "domain_from_json",
    "domain_to_json",
    "energy",
    "interior_dof_map",
    "lambda_anisotropic_two_routes",
    "lambda_max",
    "lambda_min",
    "lshape",
    "make_Q_alpha",
    "min_angle",
    "named_domain",
    "normalize",
    "pnorm",
    "pnorm_p",
    "polygonize",
    "profile_value",
    "quant_lower_constant",
    "quant_upper_bound",
    "random_member",
    "refine",
    "reflect_y",
    "rotate",
    "rotation_for_alpha",
    "run_verification",
    "shear_y",
    "solve_p",
    "solve_p2",
    "spectral",
    "theta_of_alpha",
    "triangulate",
    "verify_Q0_limit",
    "verify_disk",
    "verify_quantitative",
    "verify_rectangle",
    "verify_rigidity",
    "write_mesh_csv",
    "write_nodal_values_csv",
]

__version__ = "0.1.0"
