"""Command-line front end: ``spectrum``, ``analyze`` and ``sweep``.

Exit status: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from math import exp
from pathlib import Path

import numpy as np

from .analytic import FormulaDomainError, fwhm_formula
from .bloch import PropagationError, SpectrumTrace
from .config import ConfigError, RunConfig, parse_config
from .fit import (AnalysisError, estimate_field_from_splitting, find_peaks,
                  fit_cpt_lineshape, main_pair_splitting, measure_fwhm)
from .spectrum import compute_spectrum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SWEEP_VARS = ("N", "T", "tau", "omega", "Bz")


class CSVFormatError(AnalysisError):
    pass


def fmt(x: float) -> str:
    return repr(float(x))


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def spectrum_for(cfg: RunConfig, threads: int | None = None) -> SpectrumTrace:
    return compute_spectrum(cfg.model, cfg.params, cfg.seq, cfg.grid,
                            cfg.threads if threads is None else threads,
                            cfg.pulses.uniform_prep)


def write_csv(trace: SpectrumTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("delta_hz,raw,normalized\n")
        for d, r, v in zip(trace.delta_grid, trace.raw, trace.values):
            fh.write(f"{fmt(d)},{fmt(r)},{fmt(v)}\n")


def read_csv(path) -> SpectrumTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["delta_hz", "raw", "normalized"]:
        raise CSVFormatError(f"{path}: expected header 'delta_hz,raw,normalized'")
    grid, raw, norm = [], [], []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise CSVFormatError(f"{path}:{n}: expected 3 columns, got {len(row)}")
        try:
            d, r, v = (float(c) for c in row)
        except ValueError:
            raise CSVFormatError(f"{path}:{n}: non-numeric field") from None
        grid.append(d)
        raw.append(r)
        norm.append(v)
    if not grid:
        raise CSVFormatError(f"{path}: no data rows")
    raw_a, norm_a = np.array(raw), np.array(norm)
    degenerate = np.ptp(raw_a) == 0 and np.array_equal(raw_a, norm_a)
    try:
        return SpectrumTrace(np.array(grid), norm_a, raw_a, not degenerate)
    except ValueError as exc:
        raise CSVFormatError(f"{path}: {exc}") from None


def cmd_spectrum(cfg: RunConfig, out=None, threads: int | None = None) -> Path:
    trace = spectrum_for(cfg, threads)
    path = Path(out if out is not None else cfg.output)
    write_csv(trace, path)
    return path


def analyze_trace(trace: SpectrumTrace, mode: str) -> dict:
    """Results of one analysis mode as an ordered ``key -> value`` mapping."""
    if mode == "fwhm":
        return {"fwhm_hz": measure_fwhm(trace)}
    if mode == "fit":
        r = fit_cpt_lineshape(trace)
        return {"omega_fit_per_s": r.omega_fit, "a1": r.A1, "a2": r.A2, "rms": r.rms,
                "iterations": r.iterations}
    if mode == "peaks":
        p = find_peaks(trace)
        out = {"n_peaks": len(p),
               "centers_hz": " ".join(fmt(c) for c in p.centers),
               "heights": " ".join(fmt(h) for h in p.heights)}
        if len(p) > 1:
            out["mean_spacing_hz"] = float(np.mean(p.splittings))
        return out
    if mode == "field":
        split = main_pair_splitting(find_peaks(trace))
        return {"split_hz": split, "bz_gauss": estimate_field_from_splitting(split)}
    raise ValueError(f"unknown analysis mode {mode!r}")


UNITS = {"fwhm_hz": "Hz", "omega_fit_per_s": "1/s", "split_hz": "Hz", "bz_gauss": "G",
         "mean_spacing_hz": "Hz", "centers_hz": "Hz"}


def cmd_analyze(path, mode: str, stream=None) -> dict:
    stream = stream or sys.stdout
    result = analyze_trace(read_csv(path), mode)
    for key, val in result.items():
        unit = UNITS.get(key, "")
        shown = fmt(val) if isinstance(val, float) else val
        print(f"# {key.replace('_', ' ')}: {shown} {unit}".rstrip(), file=stream)
    for key, val in result.items():
        print(f"{key}={fmt(val) if isinstance(val, float) else val}", file=stream)
    return result


def sweep_config(cfg: RunConfig, var: str, value: float) -> RunConfig:
    if var == "N":
        if not float(value).is_integer() or value < 0:
            raise ConfigError(f"pulse count must be a non-negative integer, got {value}")
        return cfg.with_pulses(n=int(value))
    if var == "T":
        return cfg.with_pulses(integration_time=value, period=None)
    if var == "tau":
        return cfg.with_pulses(tau=value)
    if var == "omega":
        return cfg.with_params(omega_avg=value)
    if var == "Bz":
        return cfg.with_params(Bz=value)
    raise ConfigError(f"sweep variable must be one of {SWEEP_VARS}, got {var!r}")


def formula_for(cfg: RunConfig) -> float:
    p = cfg.pulses
    R = exp(-cfg.params.omega_avg ** 2 / cfg.params.constants.Gamma * p.tau)
    return fwhm_formula(R, p.resolved_period())


def cmd_sweep(cfg: RunConfig, var: str, values, out=None, threads: int | None = None,
              log=None) -> Path:
    """One spectrum and FWHM per sweep value; failed points leave empty cells."""
    rows = []
    for value in values:
        fwhm = formula = ""
        try:
            sub = sweep_config(cfg, var, value)
            sub.seq  # an invalid sequence leaves the whole row empty
        except ValueError as exc:
            if log:
                print(f"warning: {var}={value}: {exc}", file=log)
            rows.append((fmt(value), fwhm, formula))
            continue
        try:
            fwhm = fmt(measure_fwhm(spectrum_for(sub, threads)))
        except (AnalysisError, PropagationError, ValueError) as exc:
            if log:
                print(f"warning: {var}={value}: {exc}", file=log)
        try:
            formula = fmt(formula_for(sub)) if sub.pulses.protocol == "multi" else ""
        except (FormulaDomainError, ValueError, TypeError):
            formula = ""
        rows.append((fmt(value), fwhm, formula))
    path = Path(out if out is not None else cfg.output)
    with open(path, "w", newline="") as fh:
        fh.write("value,fwhm_hz,fwhm_formula_hz\n")
        for r in rows:
            fh.write(",".join(r) + "\n")
    return path


def parse_values(text: str | None, rng: str | None) -> list[float]:
    if text:
        return [float(v) for v in text.split(",") if v.strip()]
    if rng:
        parts = [float(p) for p in rng.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ConfigError("--range must be start:stop:step with step > 0 and stop >= start")
        start, stop, step = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    raise ConfigError("sweep needs --values or --range")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cptfp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="compute a spectrum and write it as CSV")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out")
    sp.add_argument("--threads", type=int, help="worker threads, 0 = auto")

    an = sub.add_parser("analyze", help="analyse a spectrum CSV")
    an.add_argument("csv")
    an.add_argument("--mode", required=True, choices=("fwhm", "fit", "peaks", "field"))

    sw = sub.add_parser("sweep", help="linewidth versus one parameter")
    sw.add_argument("--config", required=True)
    sw.add_argument("--var", required=True, choices=SWEEP_VARS)
    sw.add_argument("--values", help="comma-separated list")
    sw.add_argument("--range", dest="range_", help="start:stop:step, inclusive")
    sw.add_argument("--out")
    sw.add_argument("--threads", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            path = cmd_spectrum(load_config(args.config), args.out, args.threads)
            print(f"wrote {path}")
        elif args.command == "analyze":
            cmd_analyze(args.csv, args.mode)
        else:
            values = parse_values(args.values, args.range_)
            path = cmd_sweep(load_config(args.config), args.var, values, args.out,
                             args.threads, log=sys.stderr)
            print(f"wrote {path}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AnalysisError, PropagationError, FormulaDomainError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
