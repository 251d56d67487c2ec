"""Batch command-line front end.

Subcommands: pole | survival | entropy | evolve | scan.  Every run writes a
primary table (CSV by default) plus a JSON run record carrying the exact
configuration, so any emitted number can be reproduced by feeding the
record back as ``--config``.  Exit codes are stable: 0 success or partial
success with warnings, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, decay, evolution, friedrichs, thermo
from .config import ConfigError, RunConfig, load_config
from .numerics import (
    IntegrandError,
    MaxIterExceeded,
    NonConvergence,
    SingularStep,
    StepUnderflow,
)

_NUMERICAL_ERRORS = (
    NonConvergence, MaxIterExceeded, SingularStep, StepUnderflow,
    IntegrandError, OverflowError, friedrichs.PoleInUpperHalfPlane,
    friedrichs.ContinuationUnavailable, thermo.IllDefinedBracket,
)

_THREADS_ENV = "GAMOW_THERMO_THREADS"


class _Emitter:
    """Formats numbers at the configured precision and writes outputs."""

    def __init__(self, cfg: RunConfig, args, command: str):
        self.precision = cfg.precision()
        self.command = command
        self.format = args.format or cfg.get_str(
            "output.format", default="csv", choices={"csv", "json"})
        out = args.out or cfg.get_str("output.path",
                                      default=f"{command}.{self.format}")
        self.out_path = Path(out)
        self.quiet = args.quiet
        spec = cfg.quadrature_spec()
        self.record = {
            "tool": {"name": "gamow-thermo", "version": __version__},
            "command": command,
            "config": dict(cfg.raw),
            "seed": args.seed,
            "numerics": {
                "abs_tol": self.num(spec.abs_tol),
                "rel_tol": self.num(spec.rel_tol),
                "max_subdivisions": spec.max_subdivisions,
                "oscillation_split": self.num(spec.oscillation_split),
            },
            "warnings": [],
            "results": {},
            "tables": [],
        }

    def num(self, value) -> str:
        value = float(value)
        if value == 0.0:
            value = 0.0  # fold -0.0 into a single representation
        return "%.*g" % (self.precision, value)

    def row(self, values) -> list[str]:
        return [v if isinstance(v, str) else self.num(v) for v in values]

    def add_table(self, name: str, columns: list[str], rows) -> None:
        self.record["tables"].append(
            {"name": name, "columns": list(columns),
             "rows": [self.row(r) for r in rows]})

    def warn(self, message: str) -> None:
        self.record["warnings"].append(message)
        if not self.quiet:
            print(f"warning: {message}", file=sys.stderr)

    def _csv_path(self, index: int, name: str) -> Path:
        if index == 0:
            return self.out_path
        return self.out_path.with_name(
            f"{self.out_path.stem}_{name}{self.out_path.suffix}")

    def flush(self) -> None:
        self.out_path.parent.mkdir(parents=True, exist_ok=True)
        written = []
        if self.format == "csv":
            for index, table in enumerate(self.record["tables"]):
                path = self._csv_path(index, table["name"])
                lines = [",".join(table["columns"])]
                lines += [",".join(r) for r in table["rows"]]
                path.write_text("\n".join(lines) + "\n", newline="\n")
                written.append(path)
        sidecar = self.out_path.with_suffix(".json")
        sidecar.write_text(json.dumps(self.record, indent=2) + "\n",
                           newline="\n")
        written.append(sidecar)
        if not self.quiet:
            for path in written:
                print(f"wrote {path}")


def cmd_pole(cfg: RunConfig, emitter: _Emitter) -> int:
    model = cfg.model()
    spec = cfg.quadrature_spec()
    perturbative = friedrichs.perturbative_pole(model, spec)
    resolved = friedrichs.find_pole(model, cfg.root_config(), spec)
    if model.lam == 0.0:
        emitter.warn("stable state: coupling is zero, width vanishes")
        residual = 0.0
    else:
        residual = abs(friedrichs.self_energy(model, resolved.z, "II", spec))
    emitter.add_table(
        "pole",
        ["method", "e_r", "gamma", "residual", "delta_gamma"],
        [["resolved", resolved.e_r, resolved.gamma, residual,
          abs(resolved.gamma - perturbative.gamma)],
         ["perturbative", perturbative.e_r, perturbative.gamma, "",
          abs(resolved.gamma - perturbative.gamma)]])
    emitter.record["results"]["pole"] = {
        "e_r": emitter.num(resolved.e_r),
        "gamma": emitter.num(resolved.gamma),
        "residual": emitter.num(residual),
    }
    return 0


def cmd_survival(cfg: RunConfig, emitter: _Emitter) -> int:
    model = cfg.model()
    spec = cfg.quadrature_spec() if cfg.has_section("numerics") else None
    grid = cfg.grid("time", required=True)
    pole = friedrichs.find_pole(model, cfg.root_config(),
                                cfg.quadrature_spec())

    rows = []
    amplitudes = []
    failure = None
    for t in grid:
        try:
            amp = decay.survival_amplitude(model, float(t), spec)
        except (NonConvergence, IntegrandError) as exc:
            failure = f"quadrature failed at t = {t!r}: {exc}"
            rows.append([t, "failed", "failed", "failed", "failed"])
            break
        amplitudes.append(amp)
        p_gamow = abs(decay.gamow_approximation(pole, float(t))) ** 2
        rows.append([t, amp.real, amp.imag, abs(amp) ** 2, p_gamow])
    emitter.add_table("survival", ["t", "re_a", "im_a", "p", "p_gamow"], rows)
    emitter.record["results"]["pole"] = {"e_r": emitter.num(pole.e_r),
                                         "gamma": emitter.num(pole.gamma)}
    if failure is not None:
        emitter.record["results"]["error"] = failure
        return 2

    if cfg.get_bool("survival.regimes", default=True):
        series = decay.SurvivalSeries(
            times=np.asarray(grid), amplitudes=np.asarray(amplitudes),
            probabilities=np.abs(amplitudes) ** 2)
        if pole.gamma <= 0:
            emitter.warn("stable pole: no decay regimes to classify")
        elif series.span < 25.0 / pole.gamma:
            emitter.warn(
                f"time grid spans {series.span:.4g} < 25/Gamma = "
                f"{25 / pole.gamma:.4g}; regimes not classified")
        else:
            noise = cfg.get_float("survival.noise_floor", default=1e-13)
            try:
                report = decay.classify_regimes(series, pole,
                                                noise_floor=noise)
            except decay.InsufficientSpan as exc:
                emitter.warn(str(exc))
            else:
                emitter.record["results"]["regimes"] = _regime_dict(report,
                                                                    emitter)
    return 0


def _regime_dict(report: decay.RegimeReport, emitter: _Emitter) -> dict:
    def pair(window):
        return None if window is None else [emitter.num(window[0]),
                                            emitter.num(window[1])]

    return {
        "zeno_window": pair(report.zeno_window),
        "zeno_curvature": None if report.zeno_curvature is None
        else emitter.num(report.zeno_curvature),
        "exponential_window": pair(report.exponential_window),
        "gamma_fit": emitter.num(report.gamma_fit),
        "tail_window": pair(report.tail_window),
        "tail_exponent": None if report.tail_exponent is None
        else emitter.num(report.tail_exponent),
        "tail_resolved": report.tail_resolved,
        "tail_ratio_last": None if report.tail_ratio_last is None
        else emitter.num(report.tail_ratio_last),
        "tail_ratio_increasing": report.tail_ratio_increasing,
        "fit_residuals": {k: emitter.num(v)
                          for k, v in report.fit_residuals.items()},
    }


def cmd_entropy(cfg: RunConfig, emitter: _Emitter) -> int:
    spec = cfg.quadrature_spec()
    pole = cfg.pole(spec)
    k = cfg.get_float("thermo.k", default=1.0, positive=True)
    betas = cfg.grid("beta", positive=True)
    if betas is None:
        betas = np.array([cfg.get_float("thermo.beta", default=1.0)])
    if np.any(betas <= 0):
        raise ConfigError("beta values must be positive")

    rows = []
    for beta in betas:
        point = thermo.ThermoPoint(beta=float(beta), k=k)
        closed = thermo.complex_entropy(pole, point)
        via_log = thermo.entropy_via_log_identity(pole, point)
        rows.append([beta, closed.real_part, closed.imag_part,
                     abs(closed.value - via_log.value)])
    emitter.add_table("entropy", ["beta", "re_s", "im_s", "identity_dev"],
                      rows)
    emitter.record["results"]["pole"] = {"e_r": emitter.num(pole.e_r),
                                         "gamma": emitter.num(pole.gamma)}
    emitter.record["results"]["thermo"] = {"k": emitter.num(k),
                                           "betas": [emitter.num(b)
                                                     for b in betas]}
    return 0


def cmd_evolve(cfg: RunConfig, emitter: _Emitter) -> int:
    spec = cfg.quadrature_spec()
    pole = cfg.pole(spec)
    mode = {"in": evolution.Mode.IN_CREATION,
            "out": evolution.Mode.OUT_ANNIHILATION}[
        cfg.get_str("evolve.mode", default="in", choices={"in", "out"})]
    branch = cfg.get_str("evolve.branch", default="time",
                         choices={"time", "thermal"})
    value = cfg.get_complex("evolve.value", default=1.0 + 0.0j)
    start = evolution.LadderCoefficient(mode=mode, value=value)

    grid = cfg.grid("tau" if branch == "thermal" else "time", required=True)
    evolve = (evolution.thermal_evolve if branch == "thermal"
              else evolution.time_evolve)
    rows = []
    for tau in grid:
        c = evolve(start, pole, float(tau))
        rows.append([tau, c.value.real, c.value.imag, abs(c.value)])
    name = "tau" if branch == "thermal" else "t"
    emitter.add_table("trajectory", [name, "re_value", "im_value", "modulus"],
                      rows)

    temps = cfg.grid("temperature", positive=True)
    if temps is not None:
        k = cfg.get_float("thermo.k", default=1.0, positive=True)
        table = evolution.temperature_monotonicity(pole, temps, k=k)
        emitter.add_table(
            "temperature",
            ["temperature", "in_factor", "out_factor"],
            [[tv, iv, ov] for tv, iv, ov in zip(
                table.temperatures, table.in_factors, table.out_factors)])
        emitter.record["results"]["monotonicity"] = {
            "in_strictly_decreasing": table.in_strictly_decreasing,
            "out_strictly_increasing": table.out_strictly_increasing,
        }
    emitter.record["results"]["pole"] = {"e_r": emitter.num(pole.e_r),
                                         "gamma": emitter.num(pole.gamma)}
    return 0


def _scan_lambda(cfg: RunConfig, value: float, emitter: _Emitter):
    override = RunConfig(raw={**cfg.raw, "model.lambda": repr(value)},
                         base_dir=cfg.base_dir)
    model = override.model()
    spec = override.quadrature_spec()
    resolved = friedrichs.find_pole(model, override.root_config(), spec)
    fgr = friedrichs.perturbative_pole(model, spec).gamma
    ratio = resolved.gamma / value**2 if value != 0 else ""
    return [value, resolved.e_r, resolved.gamma, ratio, fgr, ""]


def _scan_gamma(cfg: RunConfig, value: float, emitter: _Emitter):
    e_r = cfg.get_float("pole.e_r", required=True)
    point = cfg.thermo_point()
    entry = thermo.complex_entropy(
        friedrichs.ResonancePole(e_r=e_r, gamma=value), point)
    return [value, entry.real_part, entry.imag_part, ""]


def _scan_beta(cfg: RunConfig, value: float, emitter: _Emitter):
    pole = cfg.pole()
    k = cfg.get_float("thermo.k", default=1.0, positive=True)
    entry = thermo.complex_entropy(pole,
                                   thermo.ThermoPoint(beta=value, k=k))
    return [value, entry.real_part, entry.imag_part, ""]


_SCAN_AXES = {
    "lambda": (_scan_lambda,
               ["lambda", "e_r", "gamma", "gamma_over_lambda2", "gamma_fgr",
                "error"]),
    "gamma": (_scan_gamma, ["gamma", "re_s", "im_s", "error"]),
    "beta": (_scan_beta, ["beta", "re_s", "im_s", "error"]),
}


def cmd_scan(cfg: RunConfig, emitter: _Emitter) -> int:
    axis = cfg.get_str("scan.axis", required=True,
                       choices=set(_SCAN_AXES))
    values = cfg.scan_values()
    if values.size == 0:
        raise ConfigError("scan grid is empty")
    worker, columns = _SCAN_AXES[axis]

    def one(value: float):
        try:
            return worker(cfg, float(value), emitter)
        except _NUMERICAL_ERRORS + (ValueError,) as exc:
            pad = [""] * (len(columns) - 2)
            return [value, *pad, f"{type(exc).__name__}: {exc}"]

    try:
        threads = max(1, int(os.environ.get(_THREADS_ENV, "1") or "1"))
    except ValueError:
        threads = 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, values))
    else:
        rows = [one(v) for v in values]

    emitter.add_table("scan", columns, rows)
    failures = sum(1 for r in rows if r[-1] != "")
    emitter.record["results"]["points"] = len(rows)
    emitter.record["results"]["failed_points"] = failures
    if failures:
        emitter.warn(f"{failures} of {len(rows)} scan points failed")
    return 2 if failures == len(rows) else 0


_COMMANDS = {
    "pole": cmd_pole,
    "survival": cmd_survival,
    "entropy": cmd_entropy,
    "evolve": cmd_evolve,
    "scan": cmd_scan,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamow-thermo",
        description="Resonance poles, survival dynamics and complex entropy "
                    "of quantum unstable states.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("pole", "locate the resonance pole and compare the perturbative "
                 "estimate"),
        ("survival", "survival amplitude/probability series and decay "
                     "regimes"),
        ("entropy", "complex entropy rows over beta"),
        ("evolve", "ladder-coefficient trajectories and temperature table"),
        ("scan", "sweep lambda, gamma or beta"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="flat key=value "
                       "config file or a JSON run record")
        p.add_argument("--out", default=None, help="output path (default "
                       "<command>.<format>)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="reserved for randomized helpers; recorded")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        emitter = _Emitter(cfg, args, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        status = _COMMANDS[args.command](cfg, emitter)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        emitter.record["results"]["error"] = f"{type(exc).__name__}: {exc}"
        emitter.flush()
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    emitter.flush()
    return status


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
