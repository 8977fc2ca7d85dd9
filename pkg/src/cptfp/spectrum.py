"""One entry point for every spectrum model, numerical or closed-form."""
from __future__ import annotations

import numpy as np

from . import analytic
from .bloch import SpectrumTrace, scan_spectrum
from .physics import FieldParams, PulseSequence

MODEL_NAMES = ("five", "eleven", "analytic-weak", "analytic-split", "analytic-full",
               "fourier-limit")


def analytic_rho55(model: str, params: FieldParams, seq: PulseSequence, delta,
                   uniform_prep: bool = False):
    c = params.constants
    w, G = params.omega_avg, c.Gamma
    if model == "analytic-weak":
        return analytic.rho55_weak(delta, seq, w, G, uniform_prep)
    if model == "analytic-split":
        return analytic.rho55_split(delta, params.Bz, seq, w, G, params.gamma_c,
                                    params.gamma_insensitive, c, uniform_prep)
    if model == "analytic-full":
        return analytic.rho55_full(delta, params.Bz, seq, w, G, params.gamma_c,
                                   params.gamma_insensitive, c, uniform_prep)
    if model == "fourier-limit":
        s = analytic.fourier_limit_sigma(delta, seq, w, G, uniform_prep)
        return (w / G) ** 2 * (1 + 4 * s.real)
    raise ValueError(f"not a closed-form model: {model!r}")


def compute_spectrum(model: str, params: FieldParams, seq: PulseSequence, grid_hz,
                     threads: int = 1, uniform_prep: bool = False) -> SpectrumTrace:
    """Transmission spectrum 1 - rho55 (closed form) or the simulated detection signal."""
    grid = np.asarray(grid_hz, dtype=float)
    if model == "five":
        return scan_spectrum(5, params, seq, grid, threads)
    if model == "eleven":
        return scan_spectrum(11, params, seq, grid, threads)
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
    raw = 1.0 - analytic_rho55(model, params, seq, 2 * np.pi * grid, uniform_prep)
    return SpectrumTrace.from_raw(grid, raw, {"model": model, "params": params, "seq": seq})
