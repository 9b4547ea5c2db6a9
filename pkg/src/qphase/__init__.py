"""Quantization of classical phase-space Gaussians under gamma- and s-orderings."""

from .analysis import (
    CovarianceMatrix2x2,
    GridDensity,
    UncertaintySummary,
    beta_from_lambda,
    classical_moments_from_grid,
    classify_parameters,
    critical_lambda,
    gaussification_positive,
    grid_radial_transform,
    lambda_from_beta,
    quantized_covariance,
    quantum_moments,
    uncertainty_condition,
)
from .errors import (
    DomainError,
    NotNormalized,
    NotQuantizable,
    QPhaseError,
    QuadratureError,
    TruncationTooCoarse,
)
from .fock_core import (
    Classification,
    DenseOperator,
    FockDiagonal,
    Verdict,
    classify_state,
    displaced_matrix_element,
    quantum_moments_from_operator,
    trace,
)
from .quantizers import (
    ClassicalGaussian,
    OrderingParams,
    RadialTransform,
    cg_gaussian_closed,
    cg_quantize_numeric,
    delta_quantize,
    dequantize_point,
    gaussian_fourier_radial,
    gaussian_transform,
    hermiticity_defect,
    weyl_gamma_quantize_numeric,
    weyl_gaussian_closed,
)

__version__ = "0.1.0"
