"""3D MIMO spatial correlation from Fourier-series coefficients of angular
power spectra, channel synthesis, and mutual-information analysis."""

from .channel import (
    ChannelRealization,
    ParametricConfig,
    draw_kronecker,
    draw_kronecker_batch,
    draw_parametric,
    draw_parametric_batch,
    load_realizations,
    matrix_sqrt_psd,
    rng_stream,
    save_realizations,
)
from .experiments import ExperimentSpec, ResultTable, run
from .infotheory import (
    FixedPointSolution,
    MultiUserConfig,
    deterministic_mi,
    large_scale_coefficient,
    los_elevation,
    mutual_information,
    multiuser_normalized_mi,
    pathloss_uma_db,
    rzf_precoder,
    sinr,
    user_channel,
)
from .scf import (
    CorrelationMatrix,
    IndefiniteCorrelationError,
    ScfConfig,
    TruncationBoundError,
    TruncationWarning,
    correlation_matrix,
    correlation_matrix_2d,
    required_truncation,
    rho,
    rho_2d,
    truncation_bound,
)
from .spectra import (
    AngularSpectrum,
    ClosedFormUnavailableError,
    Horizontal3gpp,
    LaplacianElevation,
    TabulatedDensity,
    UniformAngle,
    UnitGain,
    Vertical3gpp,
    VonMisesAzimuth,
    fs_coefficient,
    laplacian_normalizer,
    load_tabulated_density,
    pattern_gain,
    von_mises_from_wrapped_gaussian,
    wrapped_gaussian_spread,
)
from .specfun import (
    TrigExpansion,
    assoc_legendre_pbar,
    erf_complex,
    legendre_p,
    modified_bessel_i,
    spherical_bessel_j,
    trig_expansion,
)

__version__ = "0.1.0"
