"""Numerical laboratory for truncated Bessel, convolution, and Hankel
integral operators: Fredholm determinants, factorization identities,
remainder decay scans, and the induced determinantal point process."""

import os as _os

# THREADS caps BLAS parallelism; it must land in the environment before
# the first numpy import in this process.
if "THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["THREADS"])

__version__ = "0.1.0"

from .special import (
    AsymptoticCoefficients,
    BesselOrder,
    InvalidOrderError,
    ResolutionError,
    asymptotic_coeffs,
    bessel_dpp_kernel,
    bessel_j,
    hankel_transform,
    oscillatory_parts,
    remainder_primitive,
)
from .quadrature import (
    gauss_panels,
    geometric_edges,
    integrate,
    oscillation_edges,
    refine_edges,
    uniform_edges,
)
from .symbols import (
    NormReport,
    SymbolSpec,
    SzegoConstants,
    cosine_transform,
    exp_symbol,
    moments,
    norms_B,
    szego_constants,
)
from .kernels import KernelKind, difference_matrix, kernel_matrix
from .fredholm import (
    DeterminantResult,
    DiscretizedOperator,
    EvaluationError,
    GridMismatchError,
    OperatorFunctionals,
    QuadratureGrid,
    build_grid,
    compose,
    discretize,
    functionals,
    grid_from_edges,
    helton_howe_residual,
    jacobi_dodgson_residual,
    logdet_one_plus,
    mercer_residual,
)
from .identity import (
    IdentityReport,
    ScanResult,
    SineIdentityReport,
    bessel_div_residual,
    bo_residual,
    hilbert_profile,
    lhs_determinant,
    q_remainder,
    rate_scan,
    sine_identity_residual,
    split_exponential_transform,
    trace_decay_scan,
    z_constant,
)
from .dpp import (
    AdditiveStats,
    CltReport,
    Configuration,
    CountStatistics,
    DiscretizationError,
    MultiplicativeCheck,
    RestrictedSpectrum,
    SampleBatch,
    additive_stats,
    char_fn,
    clt_report,
    count_statistics,
    expectation_exact,
    expected_count,
    ks_scan,
    multiplicative_check,
    normalize_for_clt,
    restricted_spectrum,
    sample,
)

__all__ = [
    "AdditiveStats",
    "AsymptoticCoefficients",
    "BesselOrder",
    "CltReport",
    "Configuration",
    "CountStatistics",
    "DeterminantResult",
    "DiscretizationError",
    "DiscretizedOperator",
    "EvaluationError",
    "GridMismatchError",
    "IdentityReport",
    "InvalidOrderError",
    "KernelKind",
    "MultiplicativeCheck",
    "NormReport",
    "OperatorFunctionals",
    "QuadratureGrid",
    "ResolutionError",
    "RestrictedSpectrum",
    "SampleBatch",
    "ScanResult",
    "SineIdentityReport",
    "SymbolSpec",
    "SzegoConstants",
    "additive_stats",
    "asymptotic_coeffs",
    "bessel_div_residual",
    "bessel_dpp_kernel",
    "bessel_j",
    "bo_residual",
    "build_grid",
    "char_fn",
    "clt_report",
    "compose",
    "cosine_transform",
    "count_statistics",
    "difference_matrix",
    "discretize",
    "exp_symbol",
    "expectation_exact",
    "expected_count",
    "functionals",
    "gauss_panels",
    "geometric_edges",
    "grid_from_edges",
    "hankel_transform",
    "helton_howe_residual",
    "hilbert_profile",
    "integrate",
    "jacobi_dodgson_residual",
    "kernel_matrix",
    "ks_scan",
    "lhs_determinant",
    "logdet_one_plus",
    "mercer_residual",
    "moments",
    "multiplicative_check",
    "normalize_for_clt",
    "norms_B",
    "oscillation_edges",
    "oscillatory_parts",
    "q_remainder",
    "rate_scan",
    "refine_edges",
    "remainder_primitive",
    "restricted_spectrum",
    "sample",
    "sine_identity_residual",
    "split_exponential_transform",
    "szego_constants",
    "trace_decay_scan",
    "uniform_edges",
    "z_constant",
    "__version__",
]
