"""Physical constants, field parameters and pulse-sequence definitions.

Internally every frequency and rate is angular (rad/s). Rabi frequencies are
quoted in s^-1 and are used as angular values directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Optional, Sequence


@dataclass(frozen=True)
class Constants:
    """87Rb D1 constants used by every model."""

    Gamma: float = 2 * pi * 5.746e6   # excited-state decay, rad/s
    g1: float = -0.5017               # Lande factor, F=1 ground
    g2: float = 0.4997                # Lande factor, F=2 ground
    g3: float = -1.0 / 6.0            # Lande factor, F'=1 excited
    muB_over_h: float = 1.4e6         # Hz/G

    @property
    def zeeman_rate(self) -> float:
        """Angular Zeeman rate per unit g-factor and Gauss, rad/(s G)."""
        return 2 * pi * self.muB_over_h

    @property
    def split_hz_per_gauss(self) -> float:
        """Frequency gap between the two magneto-insensitive resonances per Gauss."""
        return 2 * abs(self.g1 + self.g2) * self.muB_over_h

    @property
    def sensitive_hz_per_gauss(self) -> float:
        return abs(self.g1 - self.g2) * self.muB_over_h


RB87 = Constants()

RABI_MODES = ("ratio", "equal")
BRANCHINGS = ("1:3", "equal")


@dataclass(frozen=True)
class FieldParams:
    """Light and field parameters of one run.

    ``rabi_mode`` selects how the four five-level Rabi frequencies follow from
    ``omega_avg``: ``"ratio"`` uses the 1:-1:sqrt3:sqrt3 dipole ratio, ``"equal"``
    sets all four to ``omega_avg``. ``branching`` selects the five-level
    excited-state decay split between the F=1 and F=2 manifolds.
    """

    omega_avg: float
    Bz: float = 0.0
    gamma_c: float = 1.2e4
    gamma_insensitive: float = 0.0
    rabi_mode: str = "ratio"
    branching: str = "1:3"
    constants: Constants = field(default=RB87)

    def __post_init__(self):
        if not self.omega_avg > 0:
            raise ValueError(f"omega_avg must be positive, got {self.omega_avg}")
        if self.Bz < 0:
            raise ValueError(f"Bz must be non-negative, got {self.Bz}")
        if self.gamma_c < 0 or self.gamma_insensitive < 0:
            raise ValueError("dephasing rates must be non-negative")
        if self.rabi_mode not in RABI_MODES:
            raise ValueError(f"rabi_mode must be one of {RABI_MODES}, got {self.rabi_mode!r}")
        if self.branching not in BRANCHINGS:
            raise ValueError(f"branching must be one of {BRANCHINGS}, got {self.branching!r}")

    def rabi_five(self) -> tuple[float, float, float, float]:
        if self.rabi_mode == "equal":
            w = self.omega_avg
            return (w, w, w, w)
        return rabi_set_from_average(self.omega_avg)

    def replace(self, **changes) -> "FieldParams":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class PulseSegment:
    """A dark gap of ``period - tau`` followed by ``tau`` of light."""

    tau: float
    period: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"pulse length must be positive, got {self.tau}")
        if self.period < self.tau:
            raise ValueError(f"period {self.period} shorter than pulse length {self.tau}")

    @property
    def dark(self) -> float:
        return self.period - self.tau


@dataclass(frozen=True)
class PulseSequence:
    """Preparation pulse, N inserted pulses, then a sampled detection pulse.

    The detection pulse is preceded by ``detect_gap`` of darkness. Sampling
    starts ``detect_delay`` into the detection pulse and runs at
    ``sample_rate`` until the pulse ends. ``prep=None`` gives a bare
    single-pulse measurement where the detection pulse is the only light.
    """

    prep: Optional[PulseSegment]
    middle: tuple[PulseSegment, ...] = ()
    detect_gap: float = 0.0
    detect_length: float = 8e-6
    detect_delay: float = 2e-6
    sample_rate: float = 1e6

    def __post_init__(self):
        object.__setattr__(self, "middle", tuple(self.middle))
        if self.detect_gap < 0:
            raise ValueError("detect_gap must be non-negative")
        if not self.detect_length > 0 or not self.sample_rate > 0:
            raise ValueError("detection length and sample rate must be positive")
        if not 0 <= self.detect_delay < self.detect_length:
            raise ValueError(
                f"detect_delay {self.detect_delay} must lie inside the detection pulse "
                f"of length {self.detect_length}")

    @classmethod
    def uniform(cls, n: int, tau: float, period: float, prep_length: float = 300e-6,
                detect_length: float = 8e-6, detect_delay: float = 2e-6,
                sample_rate: float = 1e6) -> "PulseSequence":
        """Periodic train: every pulse, detection included, ends on the ``period`` grid."""
        if n < 0:
            raise ValueError("pulse count must be non-negative")
        seg = PulseSegment(tau, period)
        return cls(prep=PulseSegment(prep_length, prep_length), middle=(seg,) * n,
                   detect_gap=period - tau, detect_length=detect_length,
                   detect_delay=detect_delay, sample_rate=sample_rate)

    @classmethod
    def from_integration_time(cls, n: int, integration_time: float, tau: float,
                              **kw) -> "PulseSequence":
        """N pulses equally spaced inside ``integration_time``: period = T/(N+1)."""
        return cls.uniform(n, tau, integration_time / (n + 1), **kw)

    @classmethod
    def single_pulse(cls, length: float = 300e-6, delay: float = 15e-6,
                     sample_rate: float = 1e6) -> "PulseSequence":
        return cls(prep=None, middle=(), detect_gap=0.0, detect_length=length,
                   detect_delay=delay, sample_rate=sample_rate)

    @property
    def n_pulses(self) -> int:
        """Total pulse count including preparation and detection."""
        return len(self.middle) + 1 + (self.prep is not None)

    @property
    def n_samples(self) -> int:
        return max(1, int(round((self.detect_length - self.detect_delay) * self.sample_rate)))

    def sample_times(self):
        """Sampling instants measured from the start of the detection pulse."""
        return [self.detect_delay + k / self.sample_rate for k in range(self.n_samples)]

    def analytic_pulses(self, uniform_prep: bool = False) -> list[PulseSegment]:
        """Pulse list for the closed-form models.

        The detection pulse enters as a pulse lasting until the first sample.
        With ``uniform_prep`` the preparation pulse is replaced by a copy of
        the first inserted pulse (or of the detection pulse when none exist).
        """
        det = PulseSegment(self.detect_delay, self.detect_gap + self.detect_delay) \
            if self.detect_delay > 0 else None
        pulses: list[PulseSegment] = []
        if self.prep is not None:
            if uniform_prep:
                pulses.append(self.middle[0] if self.middle else det or self.prep)
            else:
                pulses.append(self.prep)
        pulses.extend(self.middle)
        if det is not None:
            pulses.append(det)
        return pulses


@dataclass(frozen=True)
class ZeemanDetunings:
    Delta1: float
    Delta2: float
    Delta3: float
    Delta4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.Delta1, self.Delta2, self.Delta3, self.Delta4)


def zeeman_detunings(delta: float, Bz: float, c: Constants = RB87) -> ZeemanDetunings:
    """Diagonal ground-state detunings (rad/s) of the five-level Hamiltonian."""
    dz1 = c.g1 * c.zeeman_rate * Bz
    dz2 = c.g2 * c.zeeman_rate * Bz
    return ZeemanDetunings(delta + dz1, delta - dz1, dz2, -dz2)


def rabi_set_from_average(omega_avg: float) -> tuple[float, float, float, float]:
    """Four Rabi frequencies in the ratio 1:-1:sqrt3:sqrt3 with the given average.

    The average is sqrt((Oa**2 + Ob**2) / 2), so Oa = omega_avg / sqrt2.
    """
    if not omega_avg > 0:
        raise ValueError(f"average Rabi frequency must be positive, got {omega_avg}")
    a = omega_avg / sqrt(2.0)
    b = sqrt(3.0) * a
    return (a, -a, b, b)


def average_rabi(rabi: Sequence[float]) -> float:
    return sqrt((rabi[0] ** 2 + rabi[2] ** 2) / 2)
