"""Spectra of the Dirichlet-to-Neumann map for the Helmholtz operator -Delta - Lambda."""

from .bem import BoundaryCurve, assemble, bulk_eigenfunction, load_curve, solve_dtn_spectrum
from .branches import counting_function, duality_roundtrip, nonpositive_count_check, robin_spectrum
from .canonical import (
    Ball,
    BranchId,
    Cuboid,
    Disk,
    Interval,
    Spectrum,
    ball_branch,
    cuboid_branch,
    cuboid_spectrum,
    disk_branch,
    eigenvalues_at,
    interval_branch,
    laplace_spectrum,
)
from .errors import (
    AccuracyError,
    BesselDomainError,
    BesselOverflowError,
    CapabilityError,
    DtnError,
    GeometryError,
    PoleError,
)
from .perturb import (
    bessel_identity_check,
    branch_derivatives,
    branch_first_derivative,
    branch_second_derivative,
    dmatrix_truncated,
    small_lambda_fit,
)
from .specfun import BesselKind, bessel, bessel_derivative, bessel_j_zero, bessel_jprime_zero, bessel_scaled

__version__ = "0.1.0"
