"""Command-line interface.

Every subcommand reads a JSON run configuration (``--config FILE``) and/or
inline flags, which override config values.  Complex parameters are written
``[re, im]`` in JSON and ``--name-re/--name-im`` on the command line.

Exit codes: 0 success, 1 domain error (e.g. an exceptional point was hit),
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, geophase, monopole, spectral
from .errors import ConfigError, NHGeoError, ParseError, ValidationError

COMMANDS = ("classify", "gp", "sweep", "field", "dynamics", "multipole")
FORMATS = ("csv", "json")

# parameter schemas: name -> kind
SCHEMA = {
    "classify": {"x": "complex", "y": "complex", "z": "complex", "lambda0": "complex", "tol_ep": "real"},
    "gp": {
        "method": "str",
        "kind": "str",
        "loop": "str",
        "theta": "complex",
        "radius": "real",
        "rho": "real",
        "z": "real",
        "q": "complex",
        "epsilon": "real",
        "r": "real",
        "chi": "real",
        "V0": "complex",
        "Delta": "real",
        "delta": "real",
        "approach": "str",
        "band": "str",
        "patch": "str",
        "samples": "int",
        "tol": "real",
    },
    "sweep": {"delta": "real", "r_min": "real", "r_max": "real", "count": "int"},
    "field": {"kind": "str", "q": "complex", "epsilon": "real", "lo": "vec3", "hi": "vec3", "counts": "ivec3"},
    "dynamics": {
        "system": "str",
        "B": "real",
        "theta": "real",
        "period": "real",
        "gamma_a": "real",
        "gamma_b": "real",
        "Delta": "real",
        "V0": "complex",
        "tol": "real",
    },
    "multipole": {"q": "complex", "epsilon": "real", "r": "real", "chi": "real", "orders": "int"},
}

DEFAULTS = {
    "classify": {"x": 0j, "y": 0j, "z": 0j, "lambda0": 0j, "tol_ep": spectral.TOL_EP},
    "gp": {
        "method": "garrison_wright",
        "kind": "spherical",
        "loop": "constant_theta",
        "theta": np.pi / 2 + 0j,
        "radius": 1.0,
        "rho": 1.0,
        "z": 0.0,
        "q": 0.5 + 0j,
        "epsilon": 0.0,
        "r": 1.0,
        "chi": np.pi / 2,
        "V0": 0.5 + 0j,
        "Delta": 0.0,
        "delta": 0.0,
        "approach": "from_above",
        "band": "-",
        "patch": "north",
        "samples": 1024,
        "tol": 1e-8,
    },
    "sweep": {"delta": 1.0, "r_min": 0.0, "r_max": 2.0, "count": 21},
    "field": {"kind": "complex_dirac", "q": 0.5 + 0j, "epsilon": 1.0, "lo": [-2.0] * 3, "hi": [2.0] * 3, "counts": [5] * 3},
    "dynamics": {
        "system": "rotating_field",
        "B": 0.5,
        "theta": np.pi / 3,
        "period": 100.0,
        "gamma_a": 0.0,
        "gamma_b": 0.0,
        "Delta": 0.0,
        "V0": 0.5 + 0j,
        "tol": dynamics.DEFAULT_TOL,
    },
    "multipole": {"q": 0.5 + 0j, "epsilon": 0.1, "r": 1.0, "chi": np.pi / 3, "orders": 2},
}

COLUMNS = {
    "classify": ("kind", "witness", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus"),
    "gp": ("method", "re_gamma", "im_gamma", "error_estimate"),
    "sweep": ("r", "re_gamma_above", "re_gamma_below", "dp_gap"),
    "field": monopole.GRID_COLUMNS,
    "dynamics": (
        "index",
        "re_phi", "im_phi",
        "re_dynamical_phase", "im_dynamical_phase",
        "re_gamma", "im_gamma",
        "route_mismatch",
    ),
    "multipole": ("term", "re_gamma", "im_gamma"),
}


@dataclass
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(cmd, key, value):
    kinds = SCHEMA[cmd]
    if key not in kinds:
        raise ValidationError(key, "unknown parameter")
    kind = kinds[key]
    if kind == "complex":
        if not (isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value)):
            raise ValidationError(key, "complex values must be [re, im]")
        return complex(float(value[0]), float(value[1]))
    if kind == "real":
        if not _is_number(value):
            raise ValidationError(key, "expected a number")
        return float(value)
    if kind == "int":
        if not (isinstance(value, int) and not isinstance(value, bool)):
            raise ValidationError(key, "expected an integer")
        return int(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ValidationError(key, "expected a string")
        return value
    if kind in ("vec3", "ivec3"):
        ok = isinstance(value, list) and len(value) == 3
        check = (lambda v: isinstance(v, int) and not isinstance(v, bool)) if kind == "ivec3" else _is_number
        if not ok or not all(check(v) for v in value):
            raise ValidationError(key, "expected a list of 3 numbers")
        return [int(v) for v in value] if kind == "ivec3" else [float(v) for v in value]
    raise AssertionError(kind)


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "configuration must be a JSON object")
    for key in doc:
        if key not in ("command", "parameters", "output", "seed"):
            raise ValidationError(key, "unknown key")
    cmd = doc.get("command")
    if cmd not in COMMANDS:
        raise ValidationError("command", f"must be one of {', '.join(COMMANDS)}")
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise ValidationError("parameters", "expected an object")
    parsed = {k: _coerce(cmd, k, v) for k, v in params.items()}
    out = doc.get("output", {})
    if not isinstance(out, dict):
        raise ValidationError("output", "expected an object")
    for key in out:
        if key not in ("path", "format"):
            raise ValidationError(f"output.{key}", "unknown key")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ValidationError("output.path", "expected a string")
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        raise ValidationError("output.format", "must be csv or json")
    seed = doc.get("seed", 0)
    if not (isinstance(seed, int) and not isinstance(seed, bool)):
        raise ValidationError("seed", "expected an integer")
    return RunConfig(cmd, parsed, OutputSpec(path, fmt), seed)


def parse_config(text) -> RunConfig:
    """Parse and validate a JSON run configuration (bytes or str)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"invalid UTF-8: {e.reason}", 1, e.start + 1) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return config_from_dict(doc)


def _encode(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def config_to_dict(cfg: RunConfig) -> dict:
    doc = {"command": cfg.command, "parameters": {k: _encode(v) for k, v in sorted(cfg.parameters.items())}}
    out = {"format": cfg.output.format}
    if cfg.output.path is not None:
        out["path"] = cfg.output.path
    doc["output"] = out
    doc["seed"] = cfg.seed
    return doc


def serialize(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


# commands


def _params(cfg):
    p = dict(DEFAULTS[cfg.command])
    p.update(cfg.parameters)
    return p


def _threads():
    raw = os.environ.get("NHGEO_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError("NHGEO_THREADS", "expected an integer") from None
    if n < 1:
        raise ValidationError("NHGEO_THREADS", "must be >= 1")
    return n


def _run_classify(p):
    h = spectral.TwoLevelHamiltonian(p["lambda0"], spectral.ComplexPoint3(p["x"], p["y"], p["z"]))
    cls = spectral.classify_degeneracy(h, p["tol_ep"])
    R = spectral.csqrt(h.point.radius_sq())
    lp, lm = p["lambda0"] + R, p["lambda0"] - R
    return [
        {
            "kind": cls.kind.value,
            "witness": float(abs(cls.witness)),
            "re_lambda_plus": lp.real,
            "im_lambda_plus": lp.imag,
            "re_lambda_minus": lm.real,
            "im_lambda_minus": lm.imag,
        }
    ]


def _contour_loop(p):
    loop = p["loop"]
    n = p["samples"]
    if loop == "constant_theta":
        return geophase.constant_theta_loop(p["theta"], p["radius"], n)
    if loop == "circle":
        return geophase.circle_loop(p["rho"], p["z"], n)
    if loop == "complex_dirac":
        return geophase.complex_dirac_loop(p["rho"], p["z"], p["epsilon"], n)
    if loop == "hyperbolic":
        return geophase.hyperbolic_loop(p["rho"], p["z"], n)
    if loop == "drive":
        return geophase.drive_loop(p["V0"], p["Delta"], p["delta"], n)
    raise ValidationError("loop", f"unknown loop {loop!r}")


def _run_gp(p):
    method = p["method"]
    try:
        if method == "constant_theta":
            res = geophase.gp_constant_theta(p["kind"], p["theta"], p["band"], p["q"], p["patch"])
        elif method == "contour":
            res = geophase.gp_contour(_contour_loop(p), p["band"], p["patch"], tol=p["tol"])
        elif method == "complex_dirac":
            res = geophase.gp_complex_dirac_loop(p["q"], p["epsilon"], p["r"], p["chi"])
        elif method == "garrison_wright":
            res = geophase.gp_garrison_wright(p["V0"], p["Delta"], p["delta"], p["approach"])
        else:
            raise ValidationError("method", f"unknown method {method!r}")
    except ValueError as e:
        if isinstance(e, NHGeoError):
            raise
        raise ValidationError("parameters", str(e)) from None
    return [
        {
            "method": method,
            "re_gamma": res.gamma.real,
            "im_gamma": res.gamma.imag,
            "error_estimate": res.diagnostics.get("error_estimate"),
        }
    ]


def _run_sweep(p):
    rs = np.linspace(p["r_min"], p["r_max"], p["count"])
    delta = p["delta"]

    def row(r):
        if np.isclose(r, delta, rtol=0, atol=1e-14 * max(delta, 1.0)):
            return {"r": float(r), "re_gamma_above": None, "re_gamma_below": None, "dp_gap": None}
        above = geophase.re_gamma_resonance(r, delta, geophase.Approach.FROM_ABOVE)
        below = geophase.re_gamma_resonance(r, delta, geophase.Approach.FROM_BELOW)
        return {"r": float(r), "re_gamma_above": above, "re_gamma_below": below, "dp_gap": below - above}

    if delta <= 0:
        raise ValidationError("delta", "must be positive")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(row, rs))


def _run_field(p):
    spec = monopole.MonopoleSpec(p["q"], p["epsilon"], p["kind"])
    return monopole.sample_grid(spec, monopole.GridBox(p["lo"], p["hi"], p["counts"]))


def _run_dynamics(p):
    system = p["system"]
    if system == "rotating_field":
        h = dynamics.rotating_field(p["B"], p["theta"], p["period"])
    elif system == "driven_atom":
        w = 2 * np.pi / p["period"]
        v0 = p["V0"]
        params = dynamics.DrivenAtomParams(
            p["gamma_a"], p["gamma_b"], p["Delta"], lambda t: v0 * np.exp(1j * w * t), p["period"]
        )
        h = dynamics.rwa_hamiltonian(params)
    else:
        raise ValidationError("system", f"unknown system {system!r}")
    U = dynamics.period_propagator(h, p["tol"])
    rows = []
    for k, c in enumerate(dynamics.cyclic_states(U)):
        res = dynamics.phases_decompose(h, c, p["tol"])
        rows.append(
            {
                "index": k,
                "re_phi": res.total_phase.real,
                "im_phi": res.total_phase.imag,
                "re_dynamical_phase": res.dynamical_phase.real,
                "im_dynamical_phase": res.dynamical_phase.imag,
                "re_gamma": res.gamma.real,
                "im_gamma": res.gamma.imag,
                "route_mismatch": res.diagnostics["route_mismatch"],
            }
        )
    return rows


def _run_multipole(p):
    terms = geophase.gp_multipole(p["q"], p["epsilon"], p["r"], p["chi"], p["orders"])
    rows = [{"term": label, "re_gamma": g.real, "im_gamma": g.imag} for label, g in terms]
    total = sum(g for _, g in terms)
    exact = geophase.gp_complex_dirac_loop(p["q"], p["epsilon"], p["r"], p["chi"]).gamma
    rows.append({"term": "sum", "re_gamma": total.real, "im_gamma": total.imag})
    rows.append({"term": "exact", "re_gamma": exact.real, "im_gamma": exact.imag})
    return rows


RUNNERS = {
    "classify": _run_classify,
    "gp": _run_gp,
    "sweep": _run_sweep,
    "field": _run_field,
    "dynamics": _run_dynamics,
    "multipole": _run_multipole,
}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_records(command: str, records, fmt: str) -> str:
    if command == "field":
        return monopole.grid_to_csv(records) if fmt == "csv" else monopole.grid_to_json(records) + "\n"
    cols = COLUMNS[command]
    if fmt == "json":
        return json.dumps([{c: r.get(c) for c in cols} for r in records]) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def execute(cfg: RunConfig) -> str:
    """Run a validated configuration and return the formatted output text."""
    records = RUNNERS[cfg.command](_params(cfg))
    return format_records(cfg.command, records, cfg.output.format)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Run a configuration, write its output, and return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        text = execute(cfg)
    except NHGeoError as e:
        print(f"error: {type(e).__name__}: {e}", file=stderr)
        return e.exit_code
    if cfg.output.path is None:
        stdout.write(text)
    else:
        with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhgeo", description="Complex geometric phases of non-Hermitian two-level systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=FORMATS)
        sp.add_argument("--seed", type=int)
        for key, kind in SCHEMA[cmd].items():
            dest = f"p_{key}"
            if kind == "complex":
                sp.add_argument(_flag(key) + "-re", dest=dest + "__re", type=float)
                sp.add_argument(_flag(key) + "-im", dest=dest + "__im", type=float)
            elif kind == "real":
                sp.add_argument(_flag(key), dest=dest, type=float)
            elif kind == "int":
                sp.add_argument(_flag(key), dest=dest, type=int)
            elif kind == "str":
                sp.add_argument(_flag(key), dest=dest)
            elif kind == "vec3":
                sp.add_argument(_flag(key), dest=dest, type=float, nargs=3)
            else:
                sp.add_argument(_flag(key), dest=dest, type=int, nargs=3)
    return parser


def config_from_args(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc_text = fh.read()
        except OSError as e:
            raise ValidationError("--config", str(e)) from None
        cfg = parse_config(doc_text)
        if cfg.command != args.command:
            raise ValidationError("command", f"config is for {cfg.command!r}, invoked {args.command!r}")
    else:
        cfg = RunConfig(args.command)
    params = dict(cfg.parameters)
    for key, kind in SCHEMA[args.command].items():
        dest = f"p_{key}"
        if kind == "complex":
            re, im = getattr(args, dest + "__re"), getattr(args, dest + "__im")
            if re is None and im is None:
                continue
            old = params.get(key, DEFAULTS[args.command][key])
            params[key] = complex(old.real if re is None else re, old.imag if im is None else im)
        else:
            v = getattr(args, dest)
            if v is not None:
                params[key] = list(v) if isinstance(v, list) else v
    out = OutputSpec(args.out if args.out is not None else cfg.output.path, args.format or cfg.output.format)
    seed = args.seed if args.seed is not None else cfg.seed
    return RunConfig(args.command, params, out, seed)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        cfg = config_from_args(args)
    except ConfigError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
