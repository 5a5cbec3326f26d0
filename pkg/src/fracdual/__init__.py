"""Duality-method solver for nonlocal Dirichlet problems with measure data.

Discretizes symmetric jump kernels comparable to the fractional-Laplacian
kernel on uniform grids with zero exterior condition, solves the measure-data
problem by the duality identity, and provides the certificates, refinement
scans, potential-kernel checks, and geometry tests used by the experiment CLI.
"""

from .analysis import (
    ExponentSet,
    ScanResult,
    critical_exponents,
    embedding_ratio,
    gagliardo_seminorm,
    holder_seminorm,
    lq_energy,
    lq_norm,
    random_bump_functions,
    regularity_scan,
    sobolev_norm,
)
from .closedform import ball_solution, ball_solution_constant, getoor_constant, getoor_profile
from .config import ExperimentConfig, load_config
from .domain import (
    Annulus,
    Ball,
    BallCheckResult,
    Box,
    DomainMask,
    Grid,
    LShape,
    Predicate,
    build_mask,
    exterior_ball_check,
    grid_for_shape,
    interior_ball_check,
)
from .errors import FracdualError
from .gridfn import GridFunction, from_interior, sample
from .kernels import (
    KernelSpec,
    QuadConfig,
    alpha_stable_kernel,
    box_exterior_mass,
    cell_weight,
    comparable_radial_kernel,
    fractional_laplacian_kernel,
    kernel_eval,
    normalization_constant,
    tail_mass,
)
from .measures import RadonMeasure, atom, density_measure, discretize_to_functional, total_variation
from .operators import DiscreteOperator, assemble, consistency_residual
from .riesz import (
    PotentialKernel,
    anisotropic_potential,
    holder_mapping_check,
    isotropic_potential,
    kernel_bounds_check,
    riesz_convolve,
    riesz_normalization,
)
from .solve import (
    SolveReport,
    duality_solve,
    duality_verify,
    exterior_data_solve,
    fundamental_ratio_scan,
    solve_linear,
    weak_solve,
)

__version__ = "0.1.0"
