"""Variable-resolution deconvolution with spatially varying mollification.

The reconstruction operator applies, per output point x, the Fourier filter

    p(x, xi) = conj(gamma_hat(xi)) phi_hat(alpha beta(x) xi)
               / (|gamma_hat(xi)|^2 + |1 - phi_hat(alpha beta(x) xi)|^2)

where gamma is the convolution kernel, phi a mollifier, and beta(x) the local
resolution map.  Lowering beta inside a region of interest sharpens the
reconstruction there; the stability tooling keeps the global noise
amplification within a prescribed budget while doing so.
"""

from .betafield import (
    BetaField,
    RegionMask,
    bitmap_mask,
    constant_beta,
    disk_mask,
    full_mask,
    quantize_beta,
    rectangle_mask,
    two_region_beta,
)
from .experiments import (
    RateReport,
    convergence_rate_study,
    default_1d_config,
    default_2d_config,
    gaussian_bump,
    roi_scan,
    run_1d_experiment,
    run_2d_experiment,
    small_support_baseline,
)
from .grids import Grid, SampledField, SpectralField, SpectralGrid
from .kernels import (
    KernelSpec,
    MollifierSpec,
    eval_symbol,
    gaussian_kernel_1d,
    gaussian_kernel_2d,
    gaussian_mollifier,
    sobolev_kernel,
    tabulated_kernel,
)
from .phantoms import add_noise, pulses_phantom_1d, shepp_logan, spectral_noise
from .reconstruct import (
    NumericalContractError,
    ReconstructionParams,
    classical_filter,
    convolve,
    reconstruct_fast,
    reconstruct_oracle,
)
from .stability import (
    CalibrationError,
    CalibrationResult,
    NormEstimate,
    ScalingReport,
    StabilityReport,
    calibrate_beta,
    estimate_kappa,
    match_kappa,
    operator_norm,
    stability_scaling_experiment,
)
from .transforms import forward_transform, inverse_transform

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Grid",
    "SpectralGrid",
    "SampledField",
    "SpectralField",
    "forward_transform",
    "inverse_transform",
    "KernelSpec",
    "MollifierSpec",
    "gaussian_kernel_1d",
    "gaussian_kernel_2d",
    "sobolev_kernel",
    "tabulated_kernel",
    "gaussian_mollifier",
    "eval_symbol",
    "RegionMask",
    "BetaField",
    "disk_mask",
    "rectangle_mask",
    "bitmap_mask",
    "full_mask",
    "constant_beta",
    "two_region_beta",
    "quantize_beta",
    "ReconstructionParams",
    "NumericalContractError",
    "reconstruct_fast",
    "reconstruct_oracle",
    "classical_filter",
    "convolve",
    "StabilityReport",
    "NormEstimate",
    "ScalingReport",
    "CalibrationError",
    "CalibrationResult",
    "estimate_kappa",
    "operator_norm",
    "stability_scaling_experiment",
    "calibrate_beta",
    "match_kappa",
    "pulses_phantom_1d",
    "shepp_logan",
    "add_noise",
    "spectral_noise",
    "gaussian_bump",
    "RateReport",
    "convergence_rate_study",
    "default_1d_config",
    "default_2d_config",
    "run_1d_experiment",
    "run_2d_experiment",
    "roi_scan",
    "small_support_baseline",
]
