"""Five- and eleven-level optical Bloch equations under CPT pulse trains.

The density matrix is column-stacked, vec(rho)[i + d*j] = rho[i, j], so that
the Liouville equation becomes dV/dt = M V with a constant generator M while
the light is either on or off. Segments are propagated with exp(M t).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import sqrt
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .physics import FieldParams, PulseSequence, zeeman_detunings

MODELS = (5, 11)

# (i, j) ground pairs, zero-based, whose coherence is first-order field insensitive
INSENSITIVE_PAIRS = ((0, 3), (1, 2))

# Radiative branching of the eleven-level manifold: excited -> [(ground, fraction)]
DECAY_11 = {
    4: [(0, 1 / 12), (1, 1 / 12), (2, 1 / 4), (3, 1 / 4), (7, 1 / 3)],
    9: [(0, 1 / 12), (2, 1 / 4), (5, 1 / 12), (6, 1 / 2), (7, 1 / 12)],
    10: [(1, 1 / 12), (3, 1 / 4), (5, 1 / 12), (7, 1 / 12), (8, 1 / 2)],
}

# Transition dipole moments (units of the reduced D1 element): (ground, excited) -> tdm
TDM_11 = {
    (0, 4): sqrt(1 / 12), (1, 4): -sqrt(1 / 12), (2, 4): sqrt(1 / 4), (3, 4): sqrt(1 / 4),
    (5, 9): -sqrt(1 / 12), (5, 10): sqrt(1 / 12),
    (6, 9): sqrt(1 / 2),
    (7, 9): sqrt(1 / 12), (7, 10): sqrt(1 / 12),
    (8, 10): sqrt(1 / 2),
}

GROUND = {5: (0, 1, 2, 3), 11: (0, 1, 2, 3, 5, 6, 7, 8)}
EXCITED = {5: (4,), 11: (4, 9, 10)}


class PropagationError(RuntimeError):
    """exp(M t) produced non-finite values; the parameters are ill-conditioned."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def initial_state(model: int) -> np.ndarray:
    """Unpolarised ground state: equal population on every ground sublevel."""
    d = model
    rho = np.zeros((d, d), dtype=complex)
    g = GROUND[model]
    for i in g:
        rho[i, i] = 1.0 / len(g)
    return rho


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    model: int
    delta: float
    light_on: bool

    @property
    def dim(self) -> int:
        return self.model


def hamiltonian_5(params: FieldParams, delta: float, light_on: bool = True) -> np.ndarray:
    c = params.constants
    H = np.diag(list(zeeman_detunings(delta, params.Bz, c).as_tuple()) + [-0.5j * c.Gamma])
    H = H.astype(complex)
    if light_on:
        for i, w in enumerate(params.rabi_five()):
            H[i, 4] = H[4, i] = w / 2
    return H


def rabi_11(params: FieldParams) -> dict:
    """Rabi frequencies of all eleven-level transitions.

    One field scale serves both manifolds (equal intensities), fixed so the
    five-level couplings equal :func:`rabi_set_from_average` output.
    """
    from .physics import rabi_set_from_average
    scale = rabi_set_from_average(params.omega_avg)[0] / TDM_11[(0, 4)]
    return {k: scale * v for k, v in TDM_11.items()}


def hamiltonian_11(params: FieldParams, delta: float, light_on: bool = True) -> np.ndarray:
    c = params.constants
    z = c.zeeman_rate * params.Bz
    diag = list(zeeman_detunings(delta, params.Bz, c).as_tuple()) + [-0.5j * c.Gamma]
    diag += [delta, 2 * c.g2 * z, 0.0, -2 * c.g2 * z,
             c.g3 * z - 0.5j * c.Gamma, -c.g3 * z - 0.5j * c.Gamma]
    H = np.diag(diag).astype(complex)
    if light_on:
        for (g, e), w in rabi_11(params).items():
            H[g, e] = H[e, g] = w / 2
    return H


def _dephasing(model: int, params: FieldParams) -> np.ndarray:
    d = model
    gam = np.zeros((d, d))
    ground = GROUND[model]
    for a in ground:
        for b in ground:
            if a != b:
                pair = (min(a, b), max(a, b))
                gam[a, b] = params.gamma_insensitive if pair in INSENSITIVE_PAIRS \
                    else params.gamma_c
    return gam


def _source_5(params: FieldParams) -> list:
    G = params.constants.Gamma
    if params.branching == "equal":
        shares = (0.25, 0.25, 0.25, 0.25)
    else:
        shares = (1 / 8, 1 / 8, 3 / 8, 3 / 8)
    return [(i, 4, s * G) for i, s in enumerate(shares)]


def _source_11(params: FieldParams) -> list:
    G = params.constants.Gamma
    return [(g, e, frac * G) for e, chans in DECAY_11.items() for g, frac in chans]


def _assemble(H: np.ndarray, gam: np.ndarray, source: list) -> np.ndarray:
    d = H.shape[0]
    eye = np.eye(d)
    M = -1j * (np.kron(eye, H) - np.kron(H.conj(), eye))
    M[np.diag_indices(d * d)] -= gam.reshape(-1, order="F")
    for g, e, rate in source:
        M[g + d * g, e + d * e] += rate
    return M


def build_liouvillian_5(params: FieldParams, delta: float, light_on: bool = True) -> Liouvillian:
    """Generator of the five-level double-Lambda Bloch equations (delta in rad/s)."""
    M = _assemble(hamiltonian_5(params, delta, light_on), _dephasing(5, params),
                  _source_5(params))
    return Liouvillian(M, 5, delta, light_on)


def build_liouvillian_11(params: FieldParams, delta: float, light_on: bool = True) -> Liouvillian:
    """Generator of the full eleven-level D1 manifold with exact repopulation terms."""
    M = _assemble(hamiltonian_11(params, delta, light_on), _dephasing(11, params),
                  _source_11(params))
    return Liouvillian(M, 11, delta, light_on)


def build_liouvillian(model: int, params: FieldParams, delta: float,
                      light_on: bool = True) -> Liouvillian:
    if model == 5:
        return build_liouvillian_5(params, delta, light_on)
    if model == 11:
        return build_liouvillian_11(params, delta, light_on)
    raise ValueError(f"model must be 5 or 11, got {model!r}")


def _expm(M: np.ndarray, t: float) -> np.ndarray:
    U = expm(M * t)
    if not np.all(np.isfinite(U)):
        raise PropagationError(f"matrix exponential diverged for t={t}")
    return U


def propagate_segment(L: Liouvillian, rho: np.ndarray, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"segment duration must be non-negative, got {t}")
    if t == 0:
        return np.array(rho, dtype=complex)
    return unvec(_expm(L.matrix, t) @ vec(rho), L.dim)


class PropagatorCache:
    """exp(M t) for the light-on and light-off generators of one detuning.

    Repeated segment durations are exponentiated once. With ``enabled=False``
    every lookup recomputes, which is the reference the cache must reproduce
    bit for bit.
    """

    def __init__(self, on: Liouvillian, off: Liouvillian, enabled: bool = True):
        self.on = on
        self.off = off
        self.enabled = enabled
        self._store: dict = {}

    def get(self, light_on: bool, t: float) -> np.ndarray:
        key = (light_on, t)
        if self.enabled and key in self._store:
            return self._store[key]
        U = _expm((self.on if light_on else self.off).matrix, t)
        if self.enabled:
            self._store[key] = U
        return U

    def __len__(self):
        return len(self._store)


def absorption(model: int, rho_or_vec: np.ndarray) -> float:
    """Total excited-state population."""
    v = np.asarray(rho_or_vec)
    d = model
    if v.ndim == 2:
        return float(sum(v[e, e].real for e in EXCITED[model]))
    return float(sum(v[e + d * e].real for e in EXCITED[model]))


@dataclass
class SequenceRun:
    """Detection result plus the state after every segment (when recorded)."""

    transmission: float
    samples: np.ndarray
    states: list = field(default_factory=list)


def simulate_sequence(model: int, params: FieldParams, seq: PulseSequence, delta: float,
                      use_cache: bool = True, record: bool = False) -> SequenceRun:
    on = build_liouvillian(model, params, delta, True)
    off = build_liouvillian(model, params, delta, False)
    cache = PropagatorCache(on, off, enabled=use_cache)
    d = model
    v = vec(initial_state(model))
    states = []

    def step(light_on: bool, t: float):
        nonlocal v
        if t > 0:
            v = cache.get(light_on, t) @ v
            if record:
                states.append(unvec(v, d).copy())

    if seq.prep is not None:
        step(True, seq.prep.tau)
    for seg in seq.middle:
        step(False, seg.dark)
        step(True, seg.tau)
    step(False, seq.detect_gap)
    step(True, seq.detect_delay)
    dt = 1.0 / seq.sample_rate
    samples = np.empty(seq.n_samples)
    for k in range(seq.n_samples):
        if k:
            step(True, dt)
        samples[k] = absorption(model, v)
    return SequenceRun(1.0 - float(samples.mean()), samples, states)


def run_sequence(model: int, params: FieldParams, seq: PulseSequence, delta: float,
                 use_cache: bool = True) -> float:
    """Raw transmission 1 - <absorption> over the detection samples (delta in rad/s)."""
    return simulate_sequence(model, params, seq, delta, use_cache=use_cache).transmission


@dataclass(frozen=True)
class SpectrumTrace:
    """Transmission versus two-photon detuning in Hz.

    ``values`` is the min-max normalised trace; when the raw trace has no
    dynamic range ``values`` equals ``raw`` and ``normalized`` is False.
    """

    delta_grid: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    normalized: bool = True
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.delta_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("delta grid must be a non-empty 1-D array")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("delta grid must be strictly increasing")
        vals = np.asarray(self.values, dtype=float)
        raw = np.asarray(self.raw, dtype=float)
        if vals.shape != grid.shape or raw.shape != grid.shape:
            raise ValueError("trace values must match the grid")
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(raw))):
            raise ValueError("trace values must be finite")
        object.__setattr__(self, "delta_grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "raw", raw)

    @classmethod
    def from_raw(cls, grid, raw, metadata: Optional[dict] = None) -> "SpectrumTrace":
        raw = np.asarray(raw, dtype=float)
        lo, hi = raw.min(), raw.max()
        if hi > lo:
            return cls(grid, (raw - lo) / (hi - lo), raw, True, metadata or {})
        return cls(grid, raw.copy(), raw, False, metadata or {})


def _parallel_map(fn, items: Sequence, threads: int):
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    workers = None if threads <= 0 else threads
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def scan_spectrum(model: int, params: FieldParams, seq: PulseSequence,
                  grid_hz: Sequence[float], threads: int = 1) -> SpectrumTrace:
    """Run the sequence at every detuning of ``grid_hz`` (Hz)."""
    grid = np.asarray(grid_hz, dtype=float)
    if grid.size == 0:
        raise ValueError("empty detuning grid")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("detuning grid must be strictly increasing")
    two_pi = 2 * np.pi
    raw = _parallel_map(lambda f: run_sequence(model, params, seq, two_pi * f),
                        list(grid), threads)
    return SpectrumTrace.from_raw(grid, raw, {"model": model, "params": params, "seq": seq})
