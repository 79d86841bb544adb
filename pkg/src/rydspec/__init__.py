"""Dressed Rydberg Zeeman manifolds, EIT/Autler-Townes spectra and electrometry."""
__version__ = "0.1.0"

from .angular import HalfInt, RationalRoot, SphericalPolarization, dipole_matrix_element, wigner3j, wigner_small_d
from .coupling import (
    build_hamiltonian,
    eigen_report,
    invariance_scan,
    linear_hamiltonian,
    morris_shore_blocks,
    predict_neig,
    predict_peak_count,
)
from .eit import LadderConfig, Doppler, angle_scan, dressed_peaks, liouvillian, preset, probe_response, spectrum_scan, steady_state
from .electrometry import (
    SplittingToField,
    TwoGaussianFit,
    compare_transitions,
    field_to_splitting,
    fit_two_gaussians,
    splitting_to_field,
)

__all__ = [
    "Doppler",
    "HalfInt",
    "LadderConfig",
    "RationalRoot",
    "SphericalPolarization",
    "SplittingToField",
    "TwoGaussianFit",
    "angle_scan",
    "build_hamiltonian",
    "compare_transitions",
    "dipole_matrix_element",
    "dressed_peaks",
    "eigen_report",
    "field_to_splitting",
    "fit_two_gaussians",
    "invariance_scan",
    "linear_hamiltonian",
    "liouvillian",
    "morris_shore_blocks",
    "predict_neig",
    "predict_peak_count",
    "preset",
    "probe_response",
    "spectrum_scan",
    "splitting_to_field",
    "steady_state",
    "wigner3j",
    "wigner_small_d",
]
