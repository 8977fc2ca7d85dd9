"""Closed-form multi-pulse CPT spectra: the temporal Fabry-Perot model.

Every function takes detunings in rad/s and accepts complex arguments, so a
coherence detuning with dephasing, Delta - 1j*gamma, goes through the same
code as a bare two-photon detuning.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import asin, exp, pi, sqrt
from typing import Sequence, Union

import numpy as np

from .physics import RB87, Constants, PulseSegment, PulseSequence, zeeman_detunings

PulseInput = Union[PulseSequence, Sequence[PulseSegment]]

PAIRS = ("12", "34", "13", "24", "14", "23")
SENSITIVE = ("12", "34", "13", "24")


class FormulaDomainError(ValueError):
    """The high-finesse linewidth formula is evaluated outside its domain."""


def _pulses(p: PulseInput, uniform_prep: bool = False) -> list[PulseSegment]:
    if isinstance(p, PulseSequence):
        return p.analytic_pulses(uniform_prep)
    pulses = list(p)
    if not pulses:
        raise ValueError("pulse list must be non-empty")
    return pulses


def pump_rate(omega: float, Gamma: float) -> float:
    """Optical pumping rate Omega^2/Gamma (1/s)."""
    return omega * omega / Gamma


def lorentzian_f(x, omega: float, Gamma: float):
    """Steady-state ground coherence -Omega^2 / (4 Gamma (i x + Omega^2/Gamma))."""
    a = pump_rate(omega, Gamma)
    return -a / (4 * (1j * np.asarray(x) + a))


def coherence_step(rho0, Delta, tau: float, omega: float, Gamma: float):
    """Ground coherence after ``tau`` seconds of light starting from ``rho0``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    decay = np.exp(-(1j * np.asarray(Delta) + pump_rate(omega, Gamma)) * tau)
    return lorentzian_f(Delta, omega, Gamma) * (1 - decay) + rho0 * decay


def free_step(rho0, Delta, t: float):
    """Free precession of a ground coherence for ``t`` seconds without light."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return rho0 * np.exp(-1j * np.asarray(Delta) * t)


def sigma_fold(x, pulses: PulseInput, omega: float, Gamma: float, uniform_prep: bool = False):
    """Coherence after the train, obtained by stepping pulse by pulse from zero."""
    rho = 0j
    for seg in _pulses(pulses, uniform_prep):
        rho = free_step(rho, x, seg.dark)
        rho = coherence_step(rho, x, seg.tau, omega, Gamma)
    return rho


def sigma_general(x, pulses: PulseInput, omega: float, Gamma: float,
                  uniform_prep: bool = False):
    """Temporal FP sum for arbitrary pulse lengths and periods.

    Pulse l contributes f(x) T(l) times the product of the reflection
    coefficients R(k) and free-precession phases of every later pulse k.
    """
    segs = _pulses(pulses, uniform_prep)
    x = np.asarray(x, dtype=complex)
    a = pump_rate(omega, Gamma)
    taus = np.array([s.tau for s in segs])
    darks = np.array([s.dark for s in segs])
    xs = x[..., None]
    lit = np.exp(-(a + 1j * xs) * taus)
    # per-pulse round trip R(k) exp(-i x period(k)); suffix products over k > l.
    # Multiplying factors keeps exponent arguments small at large detuning.
    hop = np.exp(-1j * xs * darks) * lit
    ones = np.ones(hop.shape[:-1] + (1,), dtype=complex)
    after = np.concatenate([np.cumprod(hop[..., :0:-1], axis=-1)[..., ::-1], ones], axis=-1)
    return (lorentzian_f(xs, omega, Gamma) * (1 - lit) * after).sum(axis=-1)


def sigma_uniform(x, n_pulses: int, tau: float, period: float, omega: float, Gamma: float):
    """Closed geometric sum for ``n_pulses`` identical pulses."""
    if n_pulses < 1:
        raise ValueError("need at least one pulse")
    x = np.asarray(x, dtype=complex)
    a = pump_rate(omega, Gamma)
    trans = -np.expm1(-(a + 1j * x) * tau)
    log_q = -(a * tau + 1j * x * period)        # q = R exp(-i x period)
    num = -np.expm1(n_pulses * log_q)
    den = -np.expm1(log_q)
    with np.errstate(divide="ignore", invalid="ignore"):
        geo = np.where(den == 0, n_pulses, num / np.where(den == 0, 1, den))
    return lorentzian_f(x, omega, Gamma) * trans * geo


@dataclass(frozen=True)
class FPCoefficients:
    R: float
    Tc: complex
    fsr: float


def fp_coefficients(delta: float, tau: float, period: float, omega: float,
                    Gamma: float) -> FPCoefficients:
    a = pump_rate(omega, Gamma)
    return FPCoefficients(exp(-a * tau), complex(-np.expm1(-(a + 1j * delta) * tau)),
                          1.0 / period)


def reflection(omega: float, tau: float, Gamma: float = RB87.Gamma) -> float:
    return exp(-pump_rate(omega, Gamma) * tau)


@dataclass(frozen=True)
class CoherenceDetunings:
    """Complex detunings Delta_ij = Delta_i - Delta_j - i gamma_ij of the six ground pairs."""

    Delta12: complex
    Delta34: complex
    Delta13: complex
    Delta24: complex
    Delta14: complex
    Delta23: complex

    def __getitem__(self, pair: str):
        return getattr(self, "Delta" + pair)


def coherence_detunings(delta, Bz: float, gamma_c: float = 1.2e4,
                        gamma_insensitive: float = 0.0,
                        c: Constants = RB87) -> CoherenceDetunings:
    D = zeeman_detunings(delta, Bz, c).as_tuple()
    out = {}
    for pair in PAIRS:
        i, j = int(pair[0]) - 1, int(pair[1]) - 1
        g = gamma_c if pair in SENSITIVE else gamma_insensitive
        out["Delta" + pair] = np.asarray(D[i] - D[j]) - 1j * g
    return CoherenceDetunings(**out)


def rho55_weak(delta, seq: PulseInput, omega: float, Gamma: float = RB87.Gamma,
               uniform_prep: bool = False):
    """Excited population when both insensitive resonances coincide at delta."""
    s = sigma_general(delta, seq, omega, Gamma, uniform_prep)
    return (omega / Gamma) ** 2 * (1 + 4 * s.real)


def _rho55_pairs(pairs, delta, Bz, seq, omega, Gamma, gamma_c, gamma_insensitive, c,
                 uniform_prep):
    D = coherence_detunings(delta, Bz, gamma_c, gamma_insensitive, c)
    # summing before doubling keeps Bz = 0 bitwise equal to rho55_weak's 1 + 4 Re sigma
    total = sum(sigma_general(D[pair], seq, omega, Gamma, uniform_prep).real for pair in pairs)
    return (omega / Gamma) ** 2 * (1 + 2 * total)


def rho55_split(delta, Bz: float, seq: PulseInput, omega: float, Gamma: float = RB87.Gamma,
                gamma_c: float = 1.2e4, gamma_insensitive: float = 0.0,
                c: Constants = RB87, uniform_prep: bool = False):
    """Excited population from the two insensitive coherences rho14 and rho23."""
    return _rho55_pairs(("14", "23"), delta, Bz, seq, omega, Gamma, gamma_c,
                        gamma_insensitive, c, uniform_prep)


def rho55_full(delta, Bz: float, seq: PulseInput, omega: float, Gamma: float = RB87.Gamma,
               gamma_c: float = 1.2e4, gamma_insensitive: float = 0.0,
               c: Constants = RB87, uniform_prep: bool = False):
    """Excited population from all six ground coherences."""
    return _rho55_pairs(PAIRS, delta, Bz, seq, omega, Gamma, gamma_c, gamma_insensitive, c,
                        uniform_prep)


def fwhm_formula(R: float, period: float) -> float:
    """Cavity-analogy linewidth (Hz): (2 FSR / pi) asin[(1 - sqrt R) / (2 R^(1/4))]."""
    if not 0 < R <= 1:
        raise FormulaDomainError(f"R must lie in (0, 1], got {R}")
    if not period > 0:
        raise ValueError("period must be positive")
    arg = (1 - sqrt(R)) / (2 * R ** 0.25)
    if arg > 1:
        raise FormulaDomainError(f"asin argument {arg:.4g} > 1: R={R} is below the formula's range")
    return 2.0 / (pi * period) * asin(arg)


def fourier_limit_sigma(delta, pulses: PulseInput, omega: float, Gamma: float = RB87.Gamma,
                        uniform_prep: bool = False):
    """Low-saturation, short-pulse limit: a damped Fourier transform of the pulse train.

    Evaluates -(Omega^2 / 4 Gamma) * integral_0^T p(T - t) exp(-(kappa + i delta) t) dt
    with kappa = Omega^2 * (total light time) / (Gamma T), one rectangle per pulse.
    """
    segs = _pulses(pulses, uniform_prep)
    delta = np.asarray(delta, dtype=complex)
    taus = np.array([s.tau for s in segs])
    periods = np.array([s.period for s in segs])
    total = periods.sum()
    kappa = pump_rate(omega, Gamma) * taus.sum() / total
    # pulse l is lit during t' in [u_l, u_l + tau_l], t' measured back from the end
    starts = np.concatenate([np.cumsum(periods[::-1])[::-1][1:], [0.0]])
    z = (kappa + 1j * delta)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        window = np.where(z == 0, taus, -np.expm1(-z * taus) / np.where(z == 0, 1, z))
    integral = (np.exp(-z * starts) * window).sum(axis=-1)
    return -pump_rate(omega, Gamma) / 4 * integral
