"""Command-line front end: verification suites, figure data and propagation.

Subcommands: verify-identity, verify-tensors, emit-figure, propagate.
Every run resolves its configuration from built-in defaults, then an
optional JSON config file, then per-key command-line flags, and writes the
resolved values to manifest.json next to the other outputs.  Outputs are
bit-reproducible: nothing time- or host-dependent is ever written.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, geometry, identity, model, propagator
from .errors import (
    AccuracyGuard,
    ConfigError,
    DegenerateState,
    DomainError,
    GridError,
    InvalidField,
    NumericalBlowup,
    RecipeError,
    VerificationFailure,
)
from .grid import Grid1D

_USAGE_ERRORS = (
    ConfigError,
    GridError,
    DomainError,
    InvalidField,
    RecipeError,
    DegenerateState,
    OSError,
    json.JSONDecodeError,
)
_FAILURE_ERRORS = (VerificationFailure, AccuracyGuard, NumericalBlowup)

_MODEL_KEYS = {"eta": 0.1, "mass": 10.0, "gamma": 40.0, "inertia": None}
_GRID_KEYS = {"x_min": -4.0, "x_max": 6.0, "n": 4096}

_DEFAULTS = {
    "verify-identity": {
        **_MODEL_KEYS, **_GRID_KEYS,
        "t_start": 0.0, "t_end": 10.0, "samples": 101,
        "delta_t": 1e-4, "rel_tol": 1e-3, "method": "fd12", "mutation": None,
    },
    "verify-tensors": {
        "recipes": "smooth,pure-gauge",
        "sizes": "64,128,256",
        "dimension": 2,
        "tol": 1e-6,
        "slope_min": 3.5,
    },
    "emit-figure": {**_MODEL_KEYS, **_GRID_KEYS, "t_start": 0.0, "t_end": 10.0, "samples": 201},
    "propagate": {
        **_MODEL_KEYS, **_GRID_KEYS,
        "dt": 1e-4, "t_end": 2.0, "h_update": "per-step",
        "kinetic_precision": "extended", "n_samples": 11, "dump": False,
    },
}


# keys whose default is None and therefore carries no type information
_FLAG_TYPES = {"inertia": float, "mutation": str}


def _add_override_flags(sub, defaults):
    for key, default in defaults.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(default, bool):
            sub.add_argument(flag, action="store_const", const=True, default=None)
        elif isinstance(default, int) and not isinstance(default, bool):
            sub.add_argument(flag, type=int, default=None)
        elif isinstance(default, float):
            sub.add_argument(flag, type=float, default=None)
        else:
            sub.add_argument(flag, type=_FLAG_TYPES.get(key, str), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efgeo",
        description="Geometric kinetic-energy verification suites for two-component systems",
    )
    parser.add_argument("--version", action="version", version=f"efgeo {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify-identity": "check the energy-transfer identity on the solvable model",
        "verify-tensors": "check the rank-3 tensor identities on synthetic families",
        "emit-figure": "write packet center, width and geometric energy versus time",
        "propagate": "propagate the model state and compare with the closed form",
    }
    for name, defaults in _DEFAULTS.items():
        sub = subs.add_parser(name, help=helps[name])
        sub.add_argument("--config", type=str, default=None, help="JSON config file")
        sub.add_argument("--out", type=str, default="out", help="output directory")
        _add_override_flags(sub, defaults)
    return parser


def resolve_config(args) -> dict:
    defaults = _DEFAULTS[args.command]
    resolved = dict(defaults)
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)} for {args.command}")
        resolved.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _write_manifest(out_dir: Path, command: str, cfg: dict, tolerances: dict):
    manifest = {
        "command": command,
        "config": cfg,
        "tolerances": tolerances,
        "version": __version__,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _model_and_grid(cfg):
    params = model.ModelParams(
        eta=cfg["eta"], mass=cfg["mass"], gamma=cfg["gamma"], inertia=cfg["inertia"]
    )
    grid = Grid1D(x_min=cfg["x_min"], x_max=cfg["x_max"], n=cfg["n"])
    return params, grid


def cmd_verify_identity(cfg: dict, out_dir: Path) -> int:
    params, grid = _model_and_grid(cfg)
    _write_manifest(out_dir, "verify-identity", cfg, {"rel_tol": cfg["rel_tol"]})
    try:
        report = identity.verify(
            params, grid,
            t_start=cfg["t_start"], t_end=cfg["t_end"], samples=cfg["samples"],
            delta_t=cfg["delta_t"], rel_tol=cfg["rel_tol"],
            mutation=cfg["mutation"], method=cfg["method"],
        )
        failed = False
    except VerificationFailure as err:
        report = err.report
        failed = True
    report.write_json(out_dir / "report.json")
    report.write_csv(out_dir / "series.csv")
    print(
        f"identity: winner reading {report.winner}, "
        f"relative residual {report.rel_residual(report.winner):.3e} "
        f"(tolerance {report.rel_tol:.1e}) -> {'FAIL' if failed else 'PASS'}"
    )
    return 1 if failed else 0


def cmd_verify_tensors(cfg: dict, out_dir: Path) -> int:
    sizes = [int(s) for s in str(cfg["sizes"]).split(",") if s]
    recipes = [r.strip() for r in str(cfg["recipes"]).split(",") if r.strip()]
    _write_manifest(out_dir, "verify-tensors", cfg,
                    {"tol": cfg["tol"], "slope_min": cfg["slope_min"]})
    report = {"recipes": {}, "passed": True}
    for name in recipes:
        if name not in geometry.NAMED_RECIPES:
            raise ConfigError(f"unknown recipe {name!r}; choose from {sorted(geometry.NAMED_RECIPES)}")
        recipe = geometry.NAMED_RECIPES[name]()
        study = geometry.convergence_study(recipe, sizes=sizes, d=int(cfg["dimension"]))
        entry = {}
        for ident, rec in study.items():
            finest = rec["max_abs"][-1]
            base = rec["max_abs"][0]
            ok = base <= cfg["tol"]
            # order is only measurable while the residual is above roundoff
            if base > 1e-12 and not np.isnan(rec["order"]):
                ok = ok and rec["order"] >= cfg["slope_min"]
            entry[ident] = {
                "max_abs": rec["max_abs"], "sizes": rec["sizes"],
                "order": rec["order"], "finest": finest, "passed": ok,
            }
            report["passed"] = report["passed"] and ok
        report["recipes"][name] = entry
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, entry in report["recipes"].items():
        worst = max(v["max_abs"][0] for v in entry.values())
        print(f"tensors[{name}]: worst residual {worst:.3e} -> "
              f"{'PASS' if all(v['passed'] for v in entry.values()) else 'FAIL'}")
    return 0 if report["passed"] else 1


def cmd_emit_figure(cfg: dict, out_dir: Path) -> int:
    params, grid = _model_and_grid(cfg)
    _write_manifest(out_dir, "emit-figure", cfg, {})
    times = np.linspace(cfg["t_start"], cfg["t_end"], int(cfg["samples"]))
    xbar = model.mean_position(times, params)
    sigma = model.width(times, params)
    t_geo = identity.t_geo_series(params, grid, times)
    with open(out_dir / "figure.csv", "w", encoding="utf-8") as fh:
        fh.write("t,xbar,sigma,t_geo\n")
        for row in zip(times, xbar, sigma, t_geo):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    print(f"figure: {times.size} samples over [{cfg['t_start']}, {cfg['t_end']}] written")
    return 0


def cmd_propagate(cfg: dict, out_dir: Path) -> int:
    params, grid = _model_and_grid(cfg)
    _write_manifest(out_dir, "propagate", cfg, {})
    prop_cfg = propagator.PropagatorConfig(
        dt=cfg["dt"], t_end=cfg["t_end"], h_update=cfg["h_update"],
        kinetic_precision=cfg["kinetic_precision"],
    )
    dump_path = out_dir / "trajectory.csv" if cfg["dump"] else None
    result = propagator.propagate(
        params, grid, prop_cfg, n_samples=int(cfg["n_samples"]), dump_path=dump_path
    )
    result.write_csv(out_dir / "error_series.csv")
    summary = {
        "steps": result.steps,
        "final_l2_error": float(result.l2_errors[-1]),
        "norm_drift": result.norm_drift,
        "max_chi2_error": float(np.max(result.chi2_errors)),
        "max_t_geo_error": float(np.max(result.t_geo_errors)),
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"propagate: {result.steps} steps, final L2 error {summary['final_l2_error']:.3e}, "
        f"norm drift {summary['norm_drift']:.3e}"
    )
    return 0


_COMMANDS = {
    "verify-identity": cmd_verify_identity,
    "verify-tensors": cmd_verify_tensors,
    "emit-figure": cmd_emit_figure,
    "propagate": cmd_propagate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir)
    except _FAILURE_ERRORS as err:
        print(f"verification failure: {err}", file=sys.stderr)
        return 1
    except _USAGE_ERRORS as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
