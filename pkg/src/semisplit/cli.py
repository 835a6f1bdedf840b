"""Command-line driver: ``semisplit <subcommand> [--config FILE] [flags]``.

Settings come from built-in defaults, then an optional JSON config file, then
flags. Scans write one record file; ``laser-beam`` writes a directory.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import sys

from .controller import MaxStepsExceeded, StepSizeUnderflow
from .experiments import (FORMATS, LaserConfig, UnresolvedStateError, dyadic_times, emit, eps_scan,
                          fit_slope, global_error_scan, laser_beam, noise_floor, order_scan, wkb_scan)
from .grid import make_grid
from .states import InitialState, wkb

ALL_SCHEMES = ["lie", "strang", "ruth3", "yoshida4", "auz5"]

_COMMON = {
    "grid": {"n": 2048, "lower": -10.0, "upper": 10.0},
    "state": {"kind": "gaussian", "params": {"center": 0.0, "width": 2.0}},
    "problem": {"theta": 1.0, "potential": "none"},
    "format": "csv",
}

DEFAULTS = {
    "order-scan": {"scheme": ALL_SCHEMES, "eps": 1.0, "t_max": 2.0**-4, "t_min": 2.0**-12},
    "eps-scan": {"scheme": ["lie", "strang"], "eps": None, "t_max": 2.0**-4, "t_min": 2.0**-10},
    "wkb-scan": {"scheme": ALL_SCHEMES, "eps": 1e-2, "t_max": 2.0**-4, "t_min": 2.0**-12,
                 "grid": {"n": 4096}},
    "global-scan": {"scheme": ["strang"], "eps": 1 / 250, "t_max": 2.0**-5, "t_min": 2.0**-13, "T": 0.5},
    "laser-beam": {"laser": {}},
}

_SCAN_KEYS = {"scheme", "eps", "t_max", "t_min", "T", "grid", "state", "problem", "format", "out"}
_LASER_KEYS = {"laser", "format", "out"}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _as_list(v) -> list:
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _split(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_config(command: str, args: argparse.Namespace) -> dict:
    cfg = _merge(_COMMON, DEFAULTS[command]) if command != "laser-beam" else dict(DEFAULTS[command],
                                                                                   format="csv")
    if args.config:
        with open(args.config) as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
        allowed = _LASER_KEYS if command == "laser-beam" else _SCAN_KEYS
        unknown = set(user) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
        cfg = _merge(cfg, user)

    if command == "laser-beam":
        laser = cfg["laser"]
        for flag, key in (("scheme", "scheme"), ("tol", "tol"), ("grid_n", "n"), ("t_max", "T")):
            v = getattr(args, flag)
            if v is not None:
                laser[key] = _split(v)[0] if flag == "scheme" else v
        if args.eps is not None:
            laser["eps"] = float(_split(args.eps)[0])
        if args.t_min is not None:
            laser["h_min"] = args.t_min
        names = {f.name for f in dataclasses.fields(LaserConfig)}
        unknown = set(laser) - names
        if unknown:
            raise ConfigError(f"unknown laser settings: {', '.join(sorted(unknown))}")
    else:
        if args.scheme is not None:
            cfg["scheme"] = _split(args.scheme)
        if args.eps is not None:
            cfg["eps"] = [float(e) for e in _split(args.eps)]
        if args.grid_n is not None:
            cfg["grid"]["n"] = args.grid_n
        if args.t_min is not None:
            cfg["t_min"] = args.t_min
        if args.t_max is not None:
            cfg["t_max"] = args.t_max
        if args.tol is not None:
            raise ConfigError("--tol only applies to laser-beam")
        cfg["scheme"] = _as_list(cfg["scheme"])
    if args.format is not None:
        cfg["format"] = args.format
    if args.out is not None:
        cfg["out"] = args.out
    cfg.setdefault("out", "laser-out" if command == "laser-beam"
                   else f"{command.replace('-', '_')}.{cfg['format']}")
    if cfg["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    return cfg


def _single(v, name: str) -> float:
    vals = _as_list(v)
    if len(vals) != 1:
        raise ConfigError(f"{name} needs exactly one value here")
    return float(vals[0])


def run_scan(command: str, cfg: dict):
    g = cfg["grid"]
    grid = make_grid(1, g["lower"], g["upper"], int(g["n"]))
    state = InitialState(cfg["state"]["kind"], dict(cfg["state"].get("params", {})))
    prob = dict(cfg["problem"])
    ts = dyadic_times(cfg["t_max"], cfg["t_min"])
    if command == "order-scan":
        recs = order_scan(cfg["scheme"], _single(cfg["eps"], "eps"), ts, state, grid, **prob)
    elif command == "eps-scan":
        eps_list = [float(e) for e in _as_list(cfg["eps"])] or ts
        recs = eps_scan(cfg["scheme"], eps_list, state, grid, **prob)
    elif command == "wkb-scan":
        eps = _single(cfg["eps"], "eps")
        recs = wkb_scan(cfg["scheme"], eps, ts, grid, **prob)
        return recs, noise_floor(grid, wkb(grid, eps))
    else:
        if len(cfg["scheme"]) != 1:
            raise ConfigError("global-scan takes a single scheme")
        recs = global_error_scan(cfg["scheme"][0], _single(cfg["eps"], "eps"), ts, float(cfg["T"]),
                                 state, grid, **prob)
    u0 = state.evaluate(grid)
    return recs, noise_floor(grid, u0)


def _summary(recs, floor) -> list[str]:
    lines = []
    for name in dict.fromkeys(r.scheme for r in recs):
        rows = [r for r in recs if r.scheme == name]
        ts = [r.t for r in rows]
        parts = [f"{name:>10s}"]
        for field in ("local_error", "est_deviation"):
            try:
                parts.append(f"{field} slope {fit_slope(ts, [getattr(r, field) for r in rows], floor):.3f}")
            except ValueError:
                parts.append(f"{field} slope n/a")
        lines.append("  ".join(parts))
    return lines


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semisplit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("order-scan", "local error vs step size at fixed eps"),
        ("eps-scan", "local error along t = eps"),
        ("wkb-scan", "local error for the WKB initial value"),
        ("global-scan", "error at time T vs fixed step size"),
        ("laser-beam", "adaptive 2D beam propagation run"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--scheme", help="scheme name, or comma-separated names")
        p.add_argument("--eps", help="eps value, or comma-separated values for eps-scan")
        p.add_argument("--grid-n", type=int, help="grid points per axis")
        p.add_argument("--t-min", type=float, help="smallest step (laser-beam: h_min)")
        p.add_argument("--t-max", type=float, help="largest step (laser-beam: final z)")
        p.add_argument("--tol", type=float, help="local tolerance (laser-beam only)")
        p.add_argument("--out", help="output file, or directory for laser-beam")
        p.add_argument("--format", choices=FORMATS)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args.command, args)
        if args.command == "laser-beam":
            result = laser_beam(LaserConfig(**cfg["laser"]))
            written = result.write(cfg["out"], cfg["format"])
            traj = result.trajectory
            print(f"accepted {len(traj.accepted_steps)} steps, rejected {sum(traj.rejected_counts)}; "
                  f"norm drift {result.norm_drift():.2e}")
            for path in written:
                print(f"wrote {path}")
        else:
            recs, floor = run_scan(args.command, cfg)
            emit(recs, cfg["out"], cfg["format"])
            for line in _summary(recs, floor):
                print(line)
            print(f"wrote {len(recs)} records to {cfg['out']}")
    except (ConfigError, UnresolvedStateError, StepSizeUnderflow, MaxStepsExceeded, ValueError, OSError) as exc:
        print(f"semisplit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0
