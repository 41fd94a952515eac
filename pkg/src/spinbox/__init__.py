"""Spin-2 condensate toolkit: box modes, instability spectra, patterns.

The package models spin-changing collisions of a spin-2 condensate held
in an effective cylindrical box: which excitation modes become unstable
at a given quadratic Zeeman energy, how fast they grow, what the
resulting symmetry-broken density patterns look like shot by shot, and
how their orientations are estimated and filtered.
"""

from .analysis import (
    AgreementResult,
    AngleEstimate,
    AngleStats,
    CloudAnalysis,
    QuadrupoleTensor,
    RecordAnalysis,
    WeightVector,
    agreement_filter,
    analyze_cloud,
    analyze_record,
    circular_mean_std,
    kuiper_uniformity,
    mode_weight_fit,
    principal_angle,
    quadrupole_tensor,
    relative_angle_stats,
    template_fit_angle,
    wrap_difference,
)
from .bessel import bessel_j, bessel_zero
from .config import RunConfig, default_config_text, load_config, parse_config
from .constants import BOHR_RADIUS, CONSTANTS, HBAR, PLANCK, RB87_MASS, PhysicalConstants
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateFitError,
    DegenerateOrientationError,
    NumericsError,
    SpinboxError,
    TruncationError,
    ZeroMassError,
)
from .instability import (
    BogoliubovCoefficients,
    SpectrumRow,
    bogoliubov_coeffs,
    instability_rate,
    mean_pairs,
    mixing_theta,
    resonance_positions,
    spectrum_scan,
    squeezed_coeffs,
    xi,
)
from .modes import (
    DensityImage,
    Grid2D,
    ModeIndex,
    energy_1d,
    energy_2d,
    mode_1d,
    mode_2d,
    mode_amplitude_grid,
    mode_density_grid,
)
from .patterns import (
    NoiseSpec,
    RealizationRecord,
    add_noise,
    admix_neighbor,
    ensemble_average,
    interference_density,
    pattern_angle,
    realization,
    spin_pattern,
)
from .phases import (
    PairPhaseDraw,
    dilog,
    phase_sum_mean,
    phase_sum_variance,
    sample_pair_phases,
    wrap_angle,
)
from .physics import (
    CouplingConstants,
    SystemParams,
    ThomasFermi,
    TrapConfig,
    ZeemanConversion,
    coupling_constants,
    effective_potential_profile,
    q_from_field,
    thomas_fermi,
)
from .rngstream import stream

__version__ = "0.1.0"

__all__ = [
    "AgreementResult",
    "AngleEstimate",
    "AngleStats",
    "BOHR_RADIUS",
    "BogoliubovCoefficients",
    "CONSTANTS",
    "CloudAnalysis",
    "ConfigError",
    "CouplingConstants",
    "DataFormatError",
    "DegenerateFitError",
    "DegenerateOrientationError",
    "DensityImage",
    "Grid2D",
    "HBAR",
    "ModeIndex",
    "NoiseSpec",
    "NumericsError",
    "PLANCK",
    "PairPhaseDraw",
    "PhysicalConstants",
    "QuadrupoleTensor",
    "RB87_MASS",
    "RealizationRecord",
    "RecordAnalysis",
    "RunConfig",
    "SpectrumRow",
    "SpinboxError",
    "SystemParams",
    "ThomasFermi",
    "TrapConfig",
    "TruncationError",
    "WeightVector",
    "ZeemanConversion",
    "ZeroMassError",
    "add_noise",
    "admix_neighbor",
    "agreement_filter",
    "analyze_cloud",
    "analyze_record",
    "bessel_j",
    "bessel_zero",
    "bogoliubov_coeffs",
    "circular_mean_std",
    "coupling_constants",
    "default_config_text",
    "dilog",
    "effective_potential_profile",
    "energy_1d",
    "energy_2d",
    "ensemble_average",
    "instability_rate",
    "interference_density",
    "kuiper_uniformity",
    "load_config",
    "mean_pairs",
    "mixing_theta",
    "mode_1d",
    "mode_2d",
    "mode_amplitude_grid",
    "mode_density_grid",
    "mode_weight_fit",
    "parse_config",
    "pattern_angle",
    "phase_sum_mean",
    "phase_sum_variance",
    "principal_angle",
    "q_from_field",
    "quadrupole_tensor",
    "realization",
    "relative_angle_stats",
    "resonance_positions",
    "sample_pair_phases",
    "spectrum_scan",
    "spin_pattern",
    "squeezed_coeffs",
    "stream",
    "template_fit_angle",
    "thomas_fermi",
    "wrap_angle",
    "wrap_difference",
    "xi",
]
