"""Command-line front end: experiment orchestration and serialization.

Subcommands: ``sigma22``, ``density``, ``quasiprob``, ``convergence``,
``wmax``. Parameters come from flags, optionally seeded by a flat TOML
config file (flags override file values). All times in the interfaces are
t * |kappa| (the CLI works at kappa_abs = 1). Outputs are deterministic:
fixed float formatting, sorted JSON keys, no timestamps, and files are
written to a temporary path and atomically renamed.

Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance
violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from . import convergence as conv
from . import quasiprob as qp
from . import states
from .dynamics import EvolutionMethod
from .specfun import ModelParams, w_max
from .states import InitialState, TruncationError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3

METHOD_NAMES = ("exact", "noto", "magnus1", "magnus2", "magnus3", "magnus4", "magnus5")


class ConfigError(ValueError):
    pass


# flag name -> (config key, type, default)
_SHARED = {
    "k": int,
    "eta": float,
    "delta_phi": float,
    "theta": float,
    "delta_omega": float,
    "alpha0_re": float,
    "alpha0_im": float,
    "electronic": int,
    "t_start": float,
    "t_end": float,
    "steps": int,
    "nmax": int,
    "filter_width": float,
    "grid_extent": float,
    "grid_res": int,
    "quad_nodes": int,
    "out": str,
}

_DEFAULTS = {
    "k": 0,
    "eta": 0.2,
    "delta_phi": 0.0,
    "theta": 0.0,
    "delta_omega": 0.0,
    "alpha0_re": 0.0,
    "alpha0_im": 0.0,
    "electronic": 1,
    "t_start": 0.0,
    "t_end": 10.0,
    "steps": 101,
    "nmax": None,
    "filter_width": 1.5,
    "grid_extent": 4.0,
    "grid_res": 201,
    "quad_nodes": qp.DEFAULT_QUAD_NODES,
    "out": None,
    "method": ["exact"],
    "n_search": 1000,
    "delta_omega_min": None,
    "delta_omega_max": None,
    "delta_omega_steps": 25,
    "reconvergence_out": None,
    "t_factor": 4.0,
    "t_samples": 600,
}


def _add_shared(parser: argparse.ArgumentParser):
    for key, typ in _SHARED.items():
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, default=None)
    parser.add_argument(
        "--method",
        action="append",
        choices=METHOD_NAMES,
        default=None,
        help="evolution method; repeatable (default: exact)",
    )
    parser.add_argument("--config", type=str, default=None, help="TOML file with flat config keys")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionjc",
        description="Detuned nonlinear Jaynes-Cummings dynamics of a trapped ion",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sigma22", help="excited-state population over a time grid (CSV)")
    _add_shared(p)

    p = sub.add_parser("density", help="motional density matrix at t_end (JSON)")
    _add_shared(p)

    p = sub.add_parser("quasiprob", help="regularized P function on a phase-space grid (JSON)")
    _add_shared(p)

    p = sub.add_parser("convergence", help="t_max and sufficient bound over a detuning grid (CSV)")
    _add_shared(p)
    p.add_argument("--n-search", dest="n_search", type=int, default=None)
    p.add_argument("--delta-omega-min", dest="delta_omega_min", type=float, default=None)
    p.add_argument("--delta-omega-max", dest="delta_omega_max", type=float, default=None)
    p.add_argument("--delta-omega-steps", dest="delta_omega_steps", type=int, default=None)
    p.add_argument("--reconvergence-out", dest="reconvergence_out", type=str, default=None)
    p.add_argument("--t-factor", dest="t_factor", type=float, default=None)
    p.add_argument("--t-samples", dest="t_samples", type=int, default=None)

    p = sub.add_parser("wmax", help="maximum |w_n| and the attaining n (stdout)")
    _add_shared(p)
    p.add_argument("--n-search", dest="n_search", type=int, default=None)

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """File values under flag values under defaults."""
    cfg = dict(_DEFAULTS)
    if args.config is not None:
        try:
            with open(args.config, "rb") as fh:
                file_cfg = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
        for key, val in file_cfg.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
    for key in cfg:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = flag_val
    cfg["subcommand"] = args.subcommand
    return cfg


def _params(cfg: dict) -> ModelParams:
    try:
        return ModelParams(
            k=int(cfg["k"]),
            eta=float(cfg["eta"]),
            delta_phi=float(cfg["delta_phi"]),
            theta=float(cfg["theta"]),
            delta_omega=float(cfg["delta_omega"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial(cfg: dict) -> InitialState:
    try:
        return InitialState(int(cfg["electronic"]), complex(cfg["alpha0_re"], cfg["alpha0_im"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _methods(cfg: dict) -> list[EvolutionMethod]:
    try:
        return [EvolutionMethod.parse(name) for name in cfg["method"]]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _time_grid(cfg: dict) -> np.ndarray:
    steps = int(cfg["steps"])
    t0, t1 = float(cfg["t_start"]), float(cfg["t_end"])
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    if t1 < t0:
        raise ConfigError("t_end must be >= t_start")
    return np.linspace(t0, t1, steps) if steps > 1 else np.array([t0])


def _n_max(cfg: dict, initial: InitialState, params: ModelParams) -> int:
    if cfg["nmax"] is not None:
        n = int(cfg["nmax"])
        if n < 0:
            raise ConfigError("nmax must be >= 0")
        return n
    return states.default_n_max(initial.alpha0, params.k)


def _require_out(cfg: dict) -> str:
    if not cfg["out"]:
        raise ConfigError("--out is required for this subcommand")
    return str(cfg["out"])


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".ionjc-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _csv_text(header: list[str], rows: list[list[float]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _params_block(cfg: dict, params: ModelParams, initial: InitialState | None = None) -> dict:
    block = {
        "k": params.k,
        "eta": params.eta,
        "delta_phi": params.delta_phi,
        "theta": params.theta,
        "delta_omega": params.delta_omega,
    }
    if initial is not None:
        block["alpha0_re"] = initial.alpha0.real
        block["alpha0_im"] = initial.alpha0.imag
        block["electronic"] = initial.electronic
    return block


def run_sigma22(cfg: dict) -> str:
    params = _params(cfg)
    initial = _initial(cfg)
    methods = _methods(cfg)
    grid = _time_grid(cfg)
    n_max = _n_max(cfg, initial, params)
    out = _require_out(cfg)
    t0 = float(cfg["t_start"])
    columns = []
    for method in methods:
        trace = states.sigma22_trace(grid, t0, params, initial, n_max, method)
        columns.append([s for _, s in trace])
    header = ["t_kappa"] + [f"sigma22_{m.label}" for m in methods]
    rows = [[t] + [col[i] for col in columns] for i, t in enumerate(grid)]
    _atomic_write(out, _csv_text(header, rows))
    return out


def run_density(cfg: dict) -> str:
    params = _params(cfg)
    initial = _initial(cfg)
    methods = _methods(cfg)
    if len(methods) != 1:
        raise ConfigError("density takes exactly one --method")
    n_max = _n_max(cfg, initial, params)
    out = _require_out(cfg)
    t0, t1 = float(cfg["t_start"]), float(cfg["t_end"])
    build = states.rho_ground_input if initial.electronic == 1 else states.rho_excited_input
    rho = build(t1, t0, params, initial.alpha0, n_max, methods[0])
    payload = {
        "schema_version": SCHEMA_VERSION,
        "params": _params_block(cfg, params, initial) | {"method": methods[0].label},
        "t": t1,
        "t0": t0,
        "n_max": n_max,
        "re": rho.entries.real.tolist(),
        "im": rho.entries.imag.tolist(),
    }
    _atomic_write(out, _json_text(payload))
    return out


def run_quasiprob(cfg: dict) -> str:
    params = _params(cfg)
    initial = _initial(cfg)
    methods = _methods(cfg)
    if len(methods) != 1:
        raise ConfigError("quasiprob takes exactly one --method")
    n_max = _n_max(cfg, initial, params)
    out = _require_out(cfg)
    w = float(cfg["filter_width"])
    extent = float(cfg["grid_extent"])
    res = int(cfg["grid_res"])
    nodes = int(cfg["quad_nodes"])
    if w <= 0 or extent < 0 or res < 1:
        raise ConfigError("filter_width must be > 0, grid_extent >= 0, grid_res >= 1")
    t0, t1 = float(cfg["t_start"]), float(cfg["t_end"])
    build = states.rho_ground_input if initial.electronic == 1 else states.rho_excited_input
    rho = build(t1, t0, params, initial.alpha0, n_max, methods[0])
    spec = qp.GridSpec.square(extent, res)
    grid = qp.p_omega_grid(rho.entries, spec, w, nodes)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "params": _params_block(cfg, params, initial) | {"method": methods[0].label, "t": t1, "t0": t0},
        "w": w,
        "quad_nodes": nodes,
        "grid": {
            "re_min": spec.re_min,
            "re_max": spec.re_max,
            "im_min": spec.im_min,
            "im_max": spec.im_max,
            "n_re": spec.n_re,
            "n_im": spec.n_im,
        },
        "values": grid.values.tolist(),
    }
    _atomic_write(out, _json_text(payload))
    return out


def run_convergence(cfg: dict) -> str:
    params = _params(cfg)
    out = _require_out(cfg)
    wmax_val, _ = w_max(params, int(cfg["n_search"]))
    if wmax_val == 0.0:
        raise ConfigError("w_max vanishes for these parameters; no finite bounds exist")
    if cfg["delta_omega_min"] is not None or cfg["delta_omega_max"] is not None:
        if cfg["delta_omega_min"] is None or cfg["delta_omega_max"] is None:
            raise ConfigError("need both --delta-omega-min and --delta-omega-max for a scan")
        n = int(cfg["delta_omega_steps"])
        if n < 2:
            raise ConfigError("delta_omega_steps must be >= 2 for a scan")
        dws = np.linspace(float(cfg["delta_omega_min"]), float(cfg["delta_omega_max"]), n)
    else:
        dws = np.array([float(cfg["delta_omega"])])
    if np.any(dws < 0):
        raise ConfigError("detunings must be >= 0")
    tmaxes = conv.t_max_scan(dws, wmax_val)
    bound = conv.sufficient_bound(wmax_val)
    rows = [[dw, tm, bound] for dw, tm in zip(dws, tmaxes)]
    _atomic_write(out, _csv_text(["delta_omega", "t_max", "sufficient_bound"], rows))
    if cfg["reconvergence_out"]:
        rec_rows = []
        for dw in dws:
            if dw == 0.0:
                continue
            for lo, hi in conv.reconvergence_intervals(
                dw, wmax_val, t_factor=float(cfg["t_factor"]), n_samples=int(cfg["t_samples"])
            ):
                rec_rows.append([dw, lo, hi])
        _atomic_write(
            str(cfg["reconvergence_out"]),
            _csv_text(["delta_omega", "t_lo", "t_hi"], rec_rows),
        )
    return out


def run_wmax(cfg: dict) -> str:
    params = _params(cfg)
    value, arg = w_max(params, int(cfg["n_search"]))
    line = f"w_max={_fmt(value)} argmax_n={arg}"
    print(line)
    return line


_RUNNERS = {
    "sigma22": run_sigma22,
    "density": run_density,
    "quasiprob": run_quasiprob,
    "convergence": run_convergence,
    "wmax": run_wmax,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        _RUNNERS[args.subcommand](cfg)
    except ConfigError as exc:
        print(f"ionjc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, conv.RootSearchError) as exc:
        print(f"ionjc: numerical tolerance violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
