"""Multi-pulse CPT-Ramsey spectroscopy: Bloch simulation, temporal Fabry-Perot
model, and spectrum analysis for the 87Rb D1 double-Lambda system."""
from .analytic import (coherence_step, fourier_limit_sigma, free_step, fwhm_formula,
                       lorentzian_f, rho55_full, rho55_split, rho55_weak, sigma_general,
                       sigma_uniform)
from .bloch import (SpectrumTrace, build_liouvillian_5, build_liouvillian_11,
                    propagate_segment, run_sequence, scan_spectrum)
from .fit import (estimate_field_from_splitting, find_peaks, fit_cpt_lineshape,
                  measure_fwhm, predict_dips)
from .physics import (RB87, Constants, FieldParams, PulseSegment, PulseSequence,
                      rabi_set_from_average, zeeman_detunings)

__version__ = "0.1.0"

__all__ = [
    "RB87", "Constants", "FieldParams", "PulseSegment", "PulseSequence",
    "rabi_set_from_average", "zeeman_detunings",
    "SpectrumTrace", "build_liouvillian_5", "build_liouvillian_11", "propagate_segment",
    "run_sequence", "scan_spectrum",
    "coherence_step", "free_step", "lorentzian_f", "sigma_general", "sigma_uniform",
    "rho55_weak", "rho55_split", "rho55_full", "fwhm_formula", "fourier_limit_sigma",
    "measure_fwhm", "fit_cpt_lineshape", "find_peaks", "estimate_field_from_splitting",
    "predict_dips",
]
