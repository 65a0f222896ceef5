"""volterra-lab: numerical experiments on spectra of compact operators.

Builds finite models of perturbed nonnegative operators A = C + T, weak
perturbations H(I+S), restrictions of the inverse Dirichlet Laplacian on
the unit disk, and the 1-d triangular integral operator; measures singular
value decay laws and tests whether nonzero eigenvalues persist across
refinements.
"""

__version__ = "0.1.0"

from . import errors
from .analysis import (
    CriterionReport,
    VolterraVerdict,
    adjoint_spectrum_mismatch,
    criterion_divergence_report,
    criterion_integral,
    initial_omega_check,
    nonvolterra_verdict,
    omega_check,
    omega_closed_form,
    one_d_volterra_matrix,
    verdict_from_refinements,
)
from .asymptotics import (
    DecayProfile,
    LimitDiagnostics,
    estimate_schatten_order,
    fit_power_law,
    fit_slowly_varying_log,
    limit_diagnostics,
    log_power,
)
from .disk import (
    DiskModeIndex,
    HarmonicModeIndex,
    SchmidtSpec,
    TruncatedBasis,
    assemble_restriction,
    bessel_j,
    bessel_zero,
    build_basis,
    embed_schmidt_spec,
    harmonic_inner_products,
    inverse_dirichlet,
    random_schmidt_spec,
)
from .gallery import (
    GallerySeed,
    ProfileSpec,
    assemble_sum,
    make_nonnegative_C,
    make_random_T,
    make_weak_perturbation,
    profile_values,
)
from .linalg import (
    CompactOperatorModel,
    HermitianSplit,
    SNumberSequence,
    eigenvalues,
    hermitian_split,
    s_numbers,
    schatten_norm,
    spectral_radius,
)

__all__ = [name for name in dir() if not name.startswith("_")]
