"""Sectioned key = value run configuration.

Example::

    [system]
    model = analytic-weak   # five | eleven | analytic-weak | analytic-split | analytic-full | fourier-limit
    omega = 1.77e6          # average Rabi frequency, 1/s
    bz = 0.116              # bias field, G

    [pulses]
    n = 15
    tau = 2e-6              # s
    period = 3.1e-5         # s (or integration_time = 5e-4, period = T/(n+1))

    [scan]
    start = -1e5            # Hz
    stop = 1e5              # Hz
    points = 2001

    [output]
    path = spectrum.csv
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .physics import BRANCHINGS, RABI_MODES, FieldParams, PulseSegment, PulseSequence
from .spectrum import MODEL_NAMES


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


# key -> (type, default, check, unit)
SCHEMA = {
    "system": {
        "model": (str, None, lambda v: v in MODEL_NAMES, ""),
        "omega": (float, None, _positive, "1/s"),
        "bz": (float, 0.0, _nonneg, "G"),
        "gamma_c": (float, 1.2e4, _nonneg, "1/s"),
        "gamma_insensitive": (float, 0.0, _nonneg, "1/s"),
        "rabi_mode": (str, "ratio", lambda v: v in RABI_MODES, ""),
        "branching": (str, "1:3", lambda v: v in BRANCHINGS, ""),
    },
    "pulses": {
        "protocol": (str, "multi", lambda v: v in ("multi", "single"), ""),
        "n": (int, 0, _nonneg, ""),
        "tau": (float, None, _positive, "s"),
        "period": (float, None, _positive, "s"),
        "integration_time": (float, None, _positive, "s"),
        "prep": (float, 300e-6, _positive, "s"),
        "detect_gap": (float, None, _nonneg, "s"),
        "detect_length": (float, None, _positive, "s"),
        "detect_delay": (float, None, _nonneg, "s"),
        "sample_rate": (float, 1e6, _positive, "Hz"),
        "uniform_prep": (bool, False, None, ""),
    },
    "scan": {
        "start": (float, None, None, "Hz"),
        "stop": (float, None, None, "Hz"),
        "points": (int, None, lambda v: v >= 2, ""),
    },
    "output": {
        "path": (str, "spectrum.csv", None, ""),
        "threads": (int, 1, _nonneg, ""),
    },
}

REQUIRED = {("system", "model"), ("system", "omega"), ("scan", "start"), ("scan", "stop"),
            ("scan", "points")}


def _convert(kind, text: str):
    if kind is bool:
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if kind is int:
        f = float(text)
        if not f.is_integer():
            raise ValueError(f"expected an integer, got {text!r}")
        return int(f)
    if kind is float:
        v = float(text)
        if not np.isfinite(v):
            raise ValueError(f"expected a finite number, got {text!r}")
        return v
    return text


@dataclass(frozen=True)
class PulseSettings:
    protocol: str = "multi"
    n: int = 0
    tau: Optional[float] = None
    period: Optional[float] = None
    integration_time: Optional[float] = None
    prep: float = 300e-6
    detect_gap: Optional[float] = None
    detect_length: Optional[float] = None
    detect_delay: Optional[float] = None
    sample_rate: float = 1e6
    uniform_prep: bool = False

    def resolved_period(self) -> float:
        if self.integration_time is not None:
            return self.integration_time / (self.n + 1)
        return self.period

    def build(self) -> PulseSequence:
        if self.protocol == "single":
            length = self.detect_length if self.detect_length is not None else 300e-6
            delay = self.detect_delay if self.detect_delay is not None else 15e-6
            return PulseSequence.single_pulse(length, delay, self.sample_rate)
        period = self.resolved_period()
        length = self.detect_length if self.detect_length is not None else 8e-6
        delay = self.detect_delay if self.detect_delay is not None else 2e-6
        gap = self.detect_gap if self.detect_gap is not None else period - self.tau
        return PulseSequence(PulseSegment(self.prep, self.prep),
                             (PulseSegment(self.tau, period),) * self.n,
                             gap, length, delay, self.sample_rate)


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: FieldParams
    pulses: PulseSettings
    start: float
    stop: float
    points: int
    output: str = "spectrum.csv"
    threads: int = 1
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def seq(self) -> PulseSequence:
        return self.pulses.build()

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def with_pulses(self, **changes) -> "RunConfig":
        return replace(self, pulses=replace(self.pulses, **changes))

    def with_params(self, **changes) -> "RunConfig":
        return replace(self, params=replace(self.params, **changes))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration; every error names its line."""
    values: dict = {}
    lines: dict = {}
    section = None
    headers: dict = {}
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            headers.setdefault(section, lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if (section, key) in values:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno)
        kind, _, check, unit = SCHEMA[section][key]
        try:
            v = _convert(kind, val)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}: {exc}", lineno) from None
        if check is not None and not check(v):
            unit_txt = f" ({unit})" if unit else ""
            raise ConfigError(f"{section}.{key} = {val!r}{unit_txt} is out of range", lineno)
        values[(section, key)] = v
        lines[(section, key)] = lineno

    def missing_at(sec):
        # a missing key is reported at its section header, or at end of file
        return headers.get(sec, max(last, 1))

    for req in sorted(REQUIRED):
        if req not in values:
            raise ConfigError(f"missing required key {req[1]!r} in [{req[0]}]",
                              missing_at(req[0]))

    def get(sec, key):
        if (sec, key) in values:
            return values[(sec, key)]
        return SCHEMA[sec][key][1]

    def where(*keys):
        found = [lines[k] for k in keys if k in lines]
        return min(found) if found else None

    pulses = PulseSettings(**{k: get("pulses", k) for k in SCHEMA["pulses"]})
    if pulses.protocol == "multi":
        if pulses.tau is None:
            raise ConfigError("missing required key 'tau' in [pulses]", missing_at("pulses"))
        has_p = pulses.period is not None
        has_t = pulses.integration_time is not None
        if has_p == has_t:
            raise ConfigError("[pulses] needs exactly one of 'period' or 'integration_time'",
                              where(("pulses", "period"), ("pulses", "integration_time"))
                              or missing_at("pulses"))
        if pulses.resolved_period() < pulses.tau:
            raise ConfigError(
                f"pulse length tau = {pulses.tau} s exceeds the period "
                f"{pulses.resolved_period()} s", where(("pulses", "tau")))
    try:
        seq = pulses.build()
    except ValueError as exc:
        raise ConfigError(f"[pulses]: {exc}",
                          where(*[("pulses", k) for k in SCHEMA["pulses"]]) or missing_at("pulses"))
    del seq

    start, stop = get("scan", "start"), get("scan", "stop")
    if not stop > start:
        raise ConfigError(f"scan stop {stop} Hz must exceed start {start} Hz",
                          where(("scan", "stop")))
    try:
        params = FieldParams(
            omega_avg=get("system", "omega"), Bz=get("system", "bz"),
            gamma_c=get("system", "gamma_c"),
            gamma_insensitive=get("system", "gamma_insensitive"),
            rabi_mode=get("system", "rabi_mode"), branching=get("system", "branching"))
    except ValueError as exc:
        raise ConfigError(f"[system]: {exc}", where(("system", "omega"))) from None
    return RunConfig(get("system", "model"), params, pulses, start, stop,
                     get("scan", "points"), get("output", "path"), get("output", "threads"),
                     lines)
