"""Command-line entry point: ``distfreg simulate`` and ``distfreg tecator``.

Settings are layered: built-in defaults, then ``--profile``, then a
``--config`` key=value file, then explicit flags. On failure a single JSON
line ``{"status": "error", "type": ..., "message": ...}`` goes to stderr and
the exit code is nonzero (2 for usage errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from ..distributed import MODEL_KINDS, ModelConfig
from ..errors import ConfigurationError
from .config import (
    PROFILES,
    TECATOR_PAIRINGS,
    TECATOR_MODEL_DEFAULTS,
    TECATOR_PROFILES,
    ExperimentConfig,
    TecatorConfig,
    default_threads,
    read_config_file,
)
from .io import emit_results, rows_to_csv, rows_to_json
from .simulation import run_simulation
from .tecator import run_tecator

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _float_list(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _str_list(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _components(text):
    text = str(text).strip().lower()
    return None if text in ("auto", "none") else int(text)


def _bool(text):
    text = str(text).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> converter; keys double as argparse dest names
_COMMON = {
    "k": _int_list,
    "reps": int,
    "alpha": _float_list,
    "seed": int,
    "out": str,
    "format": str,
    "threads": int,
    "deterministic": _bool,
    "curve_basis": int,
    "coef_basis": int,
    "order": int,
    "components": _components,
    "variance_threshold": float,
    "bandwidths": int,
    "fplm_bandwidth": str,
    "fpca_intercept": _bool,
    "ridge": _bool,
}
_SIMULATE = {**_COMMON, "model": str, "n_train": int, "n_test": _int_list}
_TECATOR = {**_COMMON, "response": str, "covariate": str, "models": _str_list, "data": str}


def _add_common(p):
    p.add_argument("--k", type=_int_list, help="comma-separated block counts")
    p.add_argument("--reps", type=int, help="Monte Carlo replications / resamples")
    p.add_argument("--alpha", type=_float_list, help="comma-separated miscoverage levels")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--threads", type=int, help="worker threads (default: $DISTFREG_THREADS or 1)")
    p.add_argument("--profile", choices=("smoke", "paper"))
    p.add_argument("--config", help="key=value file mirroring these flags")
    p.add_argument("--deterministic", action="store_const", const=True,
                   help="blank the timing column so repeated runs are byte-identical")
    g = p.add_argument_group("model hyperparameters")
    g.add_argument("--curve-basis", dest="curve_basis", type=int, help="B-spline functions for the curves (P)")
    g.add_argument("--coef-basis", dest="coef_basis", type=int, help="B-spline functions for beta (Q)")
    g.add_argument("--order", type=int, help="B-spline order (4 = cubic)")
    g.add_argument("--components", type=_components, help="FPCA components, or 'auto' for the 99%% variance rule")
    g.add_argument("--variance-threshold", dest="variance_threshold", type=float)
    g.add_argument("--bandwidths", type=int, help="size of the bandwidth candidate grid")
    g.add_argument("--fplm-bandwidth", dest="fplm_bandwidth", choices=("pooled", "local"))
    g.add_argument("--fpca-intercept", dest="fpca_intercept", type=_bool, help="center the FPCA fit and add the mean response back (true/false)")
    g.add_argument("--ridge", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distfreg", description="Distributed scalar-on-function regression experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sim = sub.add_parser("simulate", help="Monte Carlo study on a simulated design")
    sim.add_argument("--model", choices=MODEL_KINDS)
    sim.add_argument("--n-train", dest="n_train", type=int)
    sim.add_argument("--n-test", dest="n_test", type=_int_list, help="comma-separated test sizes")
    _add_common(sim)
    tec = sub.add_parser("tecator", help="repeated 150/65 splits of the tecator spectra")
    tec.add_argument("--response", choices=tuple(TECATOR_PAIRINGS))
    tec.add_argument("--covariate", choices=tuple(TECATOR_PAIRINGS))
    tec.add_argument("--models", type=_str_list, help="comma-separated model kinds (default: all)")
    tec.add_argument("--data", help="canonical tecator CSV (default: bundled copy)")
    _add_common(tec)
    return parser


def _layer(args, keys, profiles) -> dict:
    settings = {}
    if args.profile:
        settings.update(profiles[args.profile])
    if args.config:
        raw = read_config_file(args.config)
        if "profile" in raw and not args.profile:
            prof = raw.pop("profile")
            if prof not in profiles:
                raise ConfigurationError(f"unknown profile {prof!r}")
            settings.update(profiles[prof])
        raw.pop("profile", None)
        for key, value in raw.items():
            if key not in keys:
                raise ConfigurationError(f"unknown config key {key!r}")
            try:
                settings[key] = keys[key](value)
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {key}: {exc}") from None
    for key in keys:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    return settings


def _model_config(s: dict, base: ModelConfig) -> ModelConfig:
    mapping = {
        "curve_basis": "num_curve_basis",
        "coef_basis": "num_coef_basis",
        "order": "order",
        "components": "num_components",
        "variance_threshold": "variance_threshold",
        "bandwidths": "num_bandwidths",
        "fplm_bandwidth": "fplm_bandwidth",
        "fpca_intercept": "fpca_intercept",
        "ridge": "ridge",
    }
    return replace(base, **{dst: s[src] for src, dst in mapping.items() if src in s})


def _experiment_kwargs(s: dict):
    out = {}
    for key in ("k", "reps", "alpha", "seed"):
        if key in s:
            out[key] = s[key]
    out["threads"] = s.get("threads", default_threads())
    out["timing"] = not s.get("deterministic", False)
    return out


def _emit(rows, s):
    fmt = s.get("format", "csv")
    timing = not s.get("deterministic", False)
    if s.get("out"):
        emit_results(rows, s["out"], fmt, timing=timing)
    else:
        sys.stdout.write(rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows))


def _cmd_simulate(args):
    s = _layer(args, _SIMULATE, PROFILES)
    model = s.get("model", "flm-bspline")
    kwargs = _experiment_kwargs(s)
    for key in ("n_train", "n_test"):
        if key in s:
            kwargs[key] = s[key]
    cfg = ExperimentConfig(model=model, model_config=_model_config(s, ModelConfig(kind=model)), **kwargs)
    _emit(run_simulation(cfg), s)


def _cmd_tecator(args):
    s = _layer(args, _TECATOR, TECATOR_PROFILES)
    kwargs = _experiment_kwargs(s)
    for key in ("response", "covariate", "models"):
        if key in s:
            kwargs[key] = s[key]
    if "data" in s:
        kwargs["data_path"] = s["data"]
    cfg = TecatorConfig(model_config=_model_config(s, TECATOR_MODEL_DEFAULTS), **kwargs)
    _emit(run_tecator(cfg), s)


def _fail(exc_type: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"status": "error", "type": exc_type, "message": message}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    try:
        if args.command == "simulate":
            _cmd_simulate(args)
        else:
            _cmd_tecator(args)
    except Exception as exc:  # report every failure as one parsable line
        return _fail(type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
