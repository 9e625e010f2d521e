"""Quasi-phase-matched photon-pair source modelling."""

from .dispersion import (
    CrystalSpec,
    NoDegeneratePointError,
    PolarizationConfig,
    SellmeierRangeError,
    TYPE_0,
    TYPE_I,
    TYPE_II,
    degenerate_qpm_wavelength,
    design_crystal,
    find_degenerate_point,
    fitted_crystal,
    group_mismatch,
    load_sellmeier,
    phase_mismatch,
    refractive_index,
)
from .fitting import FitProblem, anticorrelated_cross_section, fit_crystal, fit_report
from .joint_spectrum import (
    DomainPoling,
    FrequencyGrid,
    GaussianPump,
    JointSpectrum,
    RectangularPump,
    TabulatedPhaseMatching,
    UniformPoling,
    build_jsa,
    jsi,
)
from .scan import (
    DetectorModel,
    ScanConfig,
    qpm_fourier_coefficient,
    simulate_sfg_scan,
    simulate_shg_scan,
    snr,
)
from .schmidt import (
    coincidence_error_ratio,
    g2_from_jsa,
    indistinguishability,
    optimize_pump_bandwidth,
    schmidt_decompose,
)

__version__ = "0.1.0"
