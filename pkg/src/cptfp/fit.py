"""Linewidths, lineshape fits, comb peaks and field estimates from spectra."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .bloch import SpectrumTrace
from .physics import RB87, Constants


class AnalysisError(RuntimeError):
    pass


class FitError(AnalysisError):
    pass


def _half_crossing(x, y, i, j, level):
    # y[i] above level, y[j] at or below it, |i - j| == 1
    return x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i])


def measure_fwhm(trace: SpectrumTrace) -> float:
    """Full width at half maximum of the tallest peak, baseline at the trace minimum."""
    x, y = trace.delta_grid, trace.values
    top = int(np.argmax(y))
    base = float(y.min())
    if y[top] <= base:
        raise AnalysisError("flat trace has no peak")
    level = base + 0.5 * (y[top] - base)
    left = top
    while left > 0 and y[left] > level:
        left -= 1
    right = top
    while right < y.size - 1 and y[right] > level:
        right += 1
    if y[left] > level or y[right] > level:
        raise AnalysisError("peak is clipped by the scan edge; half-maximum crossing not found")
    return float(_half_crossing(x, y, right - 1, right, level)
                 - _half_crossing(x, y, left + 1, left, level))


@dataclass
class FitResult:
    omega_fit: float
    A1: float
    A2: float
    rms: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def _cpt_model(delta, omega, Gamma):
    """Re f and its derivative with respect to Omega, for delta in rad/s."""
    a = omega * omega / Gamma
    den = a * a + delta * delta
    re_f = -0.25 * a * a / den
    # d(re_f)/da = -0.5 a delta^2 / den^2 ; da/dOmega = 2 Omega / Gamma
    d_re = -0.5 * a * delta * delta / (den * den) * (2 * omega / Gamma)
    return re_f, d_re


def fit_cpt_lineshape(trace: SpectrumTrace, Gamma: float = RB87.Gamma,
                      max_iter: int = 200, xtol: float = 1e-10) -> FitResult:
    """Least-squares fit of A1 Re f(delta; Omega) + A2 to the trace.

    Damped Gauss-Newton with a Marquardt diagonal; Omega starts from the
    measured FWHM through Omega^2 = Gamma pi FWHM.
    """
    y = trace.values
    if np.ptp(y) == 0:
        raise FitError("cannot fit a flat trace")
    delta = 2 * pi * trace.delta_grid
    omega = sqrt(Gamma * pi * measure_fwhm(trace))

    def linear(omega):
        g, _ = _cpt_model(delta, omega, Gamma)
        A = np.column_stack([g, np.ones_like(g)])
        (a1, a2), *_ = np.linalg.lstsq(A, y, rcond=None)
        return a1, a2

    p = np.array([omega, *linear(omega)])

    def residual(p):
        g, dg = _cpt_model(delta, p[0], Gamma)
        r = p[1] * g + p[2] - y
        J = np.column_stack([p[1] * dg, g, np.ones_like(g)])
        return r, J

    r, J = residual(p)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        JtJ = J.T @ J
        g = J.T @ r
        d = np.diag(JtJ).copy()
        d[d == 0] = 1.0
        while True:
            step = np.linalg.solve(JtJ + lam * np.diag(d), -g)
            trial = p + step
            if trial[0] > 0:
                r_new, J_new = residual(trial)
                cost_new = float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new <= cost:
                    break
            lam *= 10
            if lam > 1e16:
                break
        if lam > 1e16:
            converged = True   # no descent direction left: at a minimum to machine precision
            break
        small = np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
        p, r, J, cost = trial, r_new, J_new, cost_new
        history.append(cost)
        lam = max(lam / 10, 1e-12)
        if small:
            converged = True
            break
    rms = sqrt(cost / y.size)
    converged = converged and np.isfinite(rms) and p[0] > 0
    if not converged:
        raise FitError(f"lineshape fit did not converge in {max_iter} iterations")
    return FitResult(float(p[0]), float(p[1]), float(p[2]), rms, it, True, history)


@dataclass(frozen=True)
class PeakSet:
    centers: np.ndarray
    heights: np.ndarray

    @property
    def splittings(self) -> np.ndarray:
        return np.diff(self.centers)

    def __len__(self):
        return len(self.centers)


def find_peaks(trace: SpectrumTrace, min_prominence: float | None = None) -> PeakSet:
    """Local maxima standing ``min_prominence`` above their surroundings.

    The default threshold is 10% of the trace's dynamic range. Centers are
    refined by a parabola through the three samples around each maximum.
    """
    x, y = trace.delta_grid, trace.values
    span = float(np.ptp(y))
    if min_prominence is not None and not min_prominence > 0:
        raise ValueError("min_prominence must be positive")
    if span == 0:
        return PeakSet(np.empty(0), np.empty(0))
    if min_prominence is None:
        min_prominence = 0.1 * span
    idx, _ = _scipy_find_peaks(y, prominence=min_prominence)
    centers, heights = [], []
    base = y.min()
    for i in idx:
        c, h = x[i], y[i]
        if 0 < i < y.size - 1:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            curv = y0 - 2 * y1 + y2
            if curv < 0:
                # uneven grids: fall back to the sample itself
                step = x[i + 1] - x[i]
                if np.isclose(step, x[i] - x[i - 1]):
                    off = 0.5 * (y0 - y2) / curv
                    c = x[i] + off * step
                    h = y1 - 0.25 * (y0 - y2) * off
        centers.append(c)
        heights.append(h - base)
    order = np.argsort(centers)
    return PeakSet(np.asarray(centers)[order], np.asarray(heights)[order])


def main_pair_splitting(peaks: PeakSet) -> float:
    """Distance (Hz) between the two tallest peaks.

    Finite pulse trains put sidelobes at 1/(total duration) around every
    tooth, so the nearest neighbour of the tallest peak is often a sidelobe;
    the two insensitive resonances are the two dominant maxima.
    """
    if len(peaks) < 2:
        raise AnalysisError("need at least two peaks to measure a splitting")
    i, j = np.argsort(peaks.heights)[-2:]
    return float(abs(peaks.centers[i] - peaks.centers[j]))


def estimate_field_from_splitting(split: float, c: Constants = RB87) -> float:
    """Bias field (G) from the gap between the two insensitive resonances."""
    if split < 0:
        raise ValueError("splitting must be non-negative")
    return split / c.split_hz_per_gauss


@dataclass(frozen=True)
class DipPrediction:
    m: int
    ratio: float        # |g1 - g2| muB Bz period / h
    resonant: bool


def predict_dips(Bz: float, period: float, m_max: int, c: Constants = RB87,
                 tol: float = 0.05) -> list[DipPrediction]:
    """Orders m <= m_max at which sensitive comb teeth land on the main teeth.

    A combination is resonant when |g1 - g2| muB Bz period / h lies within
    ``tol`` of the integer m.
    """
    if not period > 0:
        raise ValueError("period must be positive")
    ratio = c.sensitive_hz_per_gauss * Bz * period
    return [DipPrediction(m, ratio, abs(ratio - m) <= tol) for m in range(1, m_max + 1)]


def resonant_periods(Bz: float, m_max: int, c: Constants = RB87) -> list[float]:
    """Pulse periods (s) meeting the dip condition exactly, for m = 1..m_max."""
    if Bz <= 0:
        return []
    return [m / (c.sensitive_hz_per_gauss * Bz) for m in range(1, m_max + 1)]
