"""Phase sensitivity and quantum Fisher information of a lossy
Mach-Zehnder interferometer with m-photon addition."""

from .core import Detector, ExperimentParams, Scheme, chi_omega, validate
from .dual import DualComplex
from .genfun import (MomentEngine, MomentSpec, SparsePoly, TruncatedSeries,
                     build_Q, build_W, exp_series, extract_D, internal_moment,
                     moment)
from .metrology import (QfiReport, SensitivityReport, homodyne_sensitivity,
                        intensity_diff_sensitivity, optimize_phase, qcrb,
                        qfi_ideal, qfi_lossy, qfi_report, total_photon_number)

__all__ = [
    "Detector", "ExperimentParams", "Scheme", "chi_omega", "validate",
    "DualComplex",
    "MomentEngine", "MomentSpec", "SparsePoly", "TruncatedSeries",
    "build_Q", "build_W", "exp_series", "extract_D", "internal_moment",
    "moment",
    "QfiReport", "SensitivityReport", "homodyne_sensitivity",
    "intensity_diff_sensitivity", "optimize_phase", "qcrb", "qfi_ideal",
    "qfi_lossy", "qfi_report", "total_photon_number",
]

__version__ = "0.1.0"
