"""Command-line front end: ``kvquant {simulate,sweep,validate,classical}``.

Times given on the command line (``--dt``, ``--t-end``) are in units of
1/omega0; everything written to CSV is SI (seconds, metres, joules).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .classical import constant_of_motion, integration_constants, perturbation_W, trajectory, ClassicalState
from .dynamics import NormDriftError
from .experiments import PRESETS, SWEEP_ALPHAS, Scenario, manifest, preset, run_scenario, sweep_alpha
from .model import OscillatorParams, proton_params
from .validation import run_all

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    # repr-style formatting never consults the locale
    return format(float(x) + 0.0, ".17g")


# keys accepted in a --config file, same spelling as the flags
CONFIG_KEYS = {
    "preset", "scheme", "case", "alpha", "omega", "omega0", "mass", "phi", "hbar", "n_states", "dt", "t_end",
    "stride", "keep_scalar_phase", "alphas", "jobs", "seed", "x0", "v0", "out",
}


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    if "scenario" in data:  # a run manifest
        return {"scenario": data["scenario"], **{k: v for k, v in data.get("options", {}).items()}}
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")
    return data


def resolve(args: argparse.Namespace) -> tuple[Scenario, dict]:
    """Merge preset, config file and flags (flags win) into a scenario."""
    settings: dict = {}
    if args.config:
        settings.update(_load_config(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value

    if "scenario" in settings:
        scenario = Scenario.from_dict(settings.pop("scenario"))
    elif settings.get("preset"):
        if settings["preset"] not in PRESETS:
            raise ConfigError(f"preset: unknown preset {settings['preset']!r}")
        scenario = preset(settings["preset"])
    else:
        scenario = Scenario(proton_params())

    p = scenario.params
    changes = {}
    for key, field in (("alpha", "drive_amplitude"), ("omega0", "natural_frequency"), ("mass", "mass"),
                       ("phi", "drive_phase"), ("hbar", "hbar")):
        if key in settings:
            changes[field] = float(settings[key])
    was_resonant = p.is_resonant
    if "omega0" in settings and was_resonant and "omega" not in settings:
        changes["drive_frequency"] = float(settings["omega0"])
    if "omega" in settings:
        changes["drive_frequency"] = float(settings["omega"])
    try:
        p = p.with_(**changes)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc

    case = settings.get("case")
    if case == "resonant":
        if "omega" in settings and float(settings["omega"]) != p.natural_frequency:
            raise ConfigError("case: resonant case needs omega == omega0")
        p = p.with_(drive_frequency=p.natural_frequency)
    elif case == "nonresonant":
        if p.is_resonant:
            if "omega" in settings:
                raise ConfigError("case: nonresonant case needs omega != omega0")
            p = p.with_(drive_frequency=0.5 * p.natural_frequency)
    elif case is not None:
        raise ConfigError(f"case: expected 'resonant' or 'nonresonant', got {case!r}")
    case = "resonant" if p.is_resonant else "nonresonant"

    update = {"params": p, "case": case}
    if "scheme" in settings:
        update["scheme"] = settings["scheme"]
    if "n_states" in settings:
        update["n_states"] = int(settings["n_states"])
    if "t_end" in settings:
        update["t_end"] = float(settings["t_end"])
    if "dt" in settings:
        update["dt"] = None if settings["dt"] in (None, "auto") else float(settings["dt"])
    if "stride" in settings:
        update["stride"] = None if settings["stride"] in (None, "auto") else int(settings["stride"])
    if "keep_scalar_phase" in settings:
        update["keep_scalar_phase"] = bool(settings["keep_scalar_phase"])
    try:
        scenario = scenario.with_(**update)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc

    options = {k: settings[k] for k in ("alphas", "jobs", "seed", "x0", "v0") if k in settings}
    return scenario, options


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    scenario, options = resolve(args)
    series = run_scenario(scenario)
    out = _out_dir(args)
    n = series.n_states
    with open(out / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *[f"P{k}" for k in range(n)], "S", "E", "norm"])
        for i in range(series.t.size):
            w.writerow([fmt(series.t[i]), *map(fmt, series.probabilities[i]), fmt(series.entropy[i]),
                        fmt(series.energy[i]), fmt(series.norm[i])])
    _write_json(out / "manifest.json", manifest(scenario, series, command="simulate", options=options))
    print(f"wrote {out / 'series.csv'} ({series.t.size} rows, norm drift {series.diagnostics['norm_drift']:.2e})")
    return EXIT_OK


def _parse_alphas(value) -> list[float]:
    if value is None:
        return list(SWEEP_ALPHAS)
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    try:
        return [float(v) for v in str(value).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"alphas: {exc}") from exc


def cmd_sweep(args) -> int:
    scenario, options = resolve(args)
    alphas = _parse_alphas(options.get("alphas"))
    try:
        result = sweep_alpha(scenario, alphas, jobs=int(options.get("jobs", 1))).sorted()
    except ValueError as exc:
        raise ConfigError(f"alphas: {exc}") from exc
    out = _out_dir(args)
    failed = result.failed
    header = ["alpha", "S_bar_K", "S_bar_H", "E_bar_K", "E_bar_H"] + (["error"] if failed else [])
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in result.rows:
            row = [fmt(r.alpha), fmt(r.entropy_bar_k), fmt(r.entropy_bar_h), fmt(r.energy_bar_k), fmt(r.energy_bar_h)]
            w.writerow(row + ([r.error] if failed else []))
    options["alphas"] = alphas
    _write_json(out / "manifest.json", manifest(scenario, command="sweep", options=options,
                                                 failures=[r.error for r in failed]))
    for r in failed:
        print(r.error, file=sys.stderr)
    print(f"wrote {out / 'sweep.csv'} ({len(result.rows)} rows, {len(failed)} failed)")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_validate(args) -> int:
    scenario, options = resolve(args)
    results = run_all(scenario.params, seed=int(options.get("seed", 0)))
    for r in results:
        print(r.line())
    if args.out:
        _write_json(_out_dir(args) / "validation.json", [r.to_dict() for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def cmd_classical(args) -> int:
    scenario, options = resolve(args)
    p = scenario.params
    ell = p.oscillator_length
    x0 = float(options.get("x0", ell))
    v0 = float(options.get("v0", 0.0))
    c = integration_constants(p, ClassicalState(x0, v0, 0.0))
    dt, stride, n_steps = scenario.with_(dt=scenario.dt or 1e-3, stride=scenario.stride or 10).grid()
    tau = np.arange(0, n_steps + 1, stride) * dt
    t = tau / p.natural_frequency
    path = trajectory(p, c.C1, c.C2, t)
    K = constant_of_motion(p, path)
    W = perturbation_W(p, path)
    out = _out_dir(args)
    with open(out / "classical.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "v", "K", "W"])
        for row in zip(t, path.x, path.v, K, W):
            w.writerow([fmt(v) for v in row])
    _write_json(out / "manifest.json", manifest(scenario, command="classical", options={**options, "x0": x0, "v0": v0}))
    print(f"wrote {out / 'classical.csv'} ({t.size} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings or a previous manifest.json")
    common.add_argument("--preset", choices=PRESETS)
    common.add_argument("--scheme", choices=["K", "H"])
    common.add_argument("--case", choices=["resonant", "nonresonant"])
    common.add_argument("--alpha", type=float, help="drive amplitude [N]")
    common.add_argument("--omega", type=float, help="drive frequency [rad/s]")
    common.add_argument("--omega0", type=float, help="natural frequency [rad/s]")
    common.add_argument("--mass", type=float, help="mass [kg]")
    common.add_argument("--phi", type=float, help="drive phase [rad]")
    common.add_argument("--n-states", dest="n_states", type=int)
    common.add_argument("--dt", help="step in units of 1/omega0, or 'auto'")
    common.add_argument("--t-end", dest="t_end", type=float, help="horizon in units of 1/omega0")
    common.add_argument("--stride", help="samples every N steps, or 'auto'")
    phase = common.add_mutually_exclusive_group()
    phase.add_argument("--keep-scalar-phase", dest="keep_scalar_phase", action="store_true", default=None)
    phase.add_argument("--strip-scalar-phase", dest="keep_scalar_phase", action="store_false")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--jobs", type=int, help="parallel sweep rows")
    common.add_argument("--seed", type=int, help="seed for randomized validation states")

    parser = argparse.ArgumentParser(prog="kvquant", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="one run, writes series.csv").set_defaults(func=cmd_simulate)
    sw = sub.add_parser("sweep", parents=[common], help="alpha sweep, writes sweep.csv")
    sw.add_argument("--alphas", help="comma-separated drive amplitudes [N]")
    sw.set_defaults(func=cmd_sweep)
    sub.add_parser("validate", parents=[common], help="run the oracle suites").set_defaults(func=cmd_validate)
    cl = sub.add_parser("classical", parents=[common], help="classical trajectory, writes classical.csv")
    cl.add_argument("--x0", type=float, help="initial position [m] (default: one oscillator length)")
    cl.add_argument("--v0", type=float, help="initial velocity [m/s]")
    cl.set_defaults(func=cmd_classical)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NormDriftError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # rejected grid or initial state
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
