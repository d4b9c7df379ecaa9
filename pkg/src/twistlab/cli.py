"""Command line runner: ``twistlab run|validate <config.json>`` and ``twistlab report-all <suite>``.

Exit codes: 0 all checks pass, 2 a check failed, 1 bad input or a problem
size above the solver limits.  Everything is computed before any file is
written, so exit code 1 leaves no artifacts behind.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import pipelines as pl
from .morse import NotMorseError

SCHEMA_VERSION = 1

_num = {"type": "number"}
_vec = {"type": "array", "items": _num}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": sorted(pl.KINDS) + ["report-all"]},
        "suite": {"enum": sorted(pl.SUITES)},
        "model": {
            "type": "object",
            "properties": {
                "type": {"enum": ["torus", "surface", "multiplier"]},
                "n": {"type": "integer", "minimum": 1, "maximum": 3},
                "resolution": {"type": "integer", "minimum": 1},
                "genus": {"type": "integer", "minimum": 1},
                "refine": {"type": "integer", "minimum": 0},
                "segments": {"type": "integer", "minimum": 3},
                "covers": {"type": "array", "items": {"type": "integer"}},
                "direction": {"type": "array", "items": {"type": "integer"}},
            },
        },
        "twist": {
            "type": "object",
            "properties": {"class": _vec, "phase": _vec, "scale": _num},
            "additionalProperties": False,
        },
        "fiber": {
            "type": "object",
            "properties": {
                "matrix_dim": {"type": "integer", "minimum": 1},
                "multiplicity": {"type": "integer", "minimum": 1},
                "ranks": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "algebra": {"type": "object"},
            },
        },
        "degree": {"type": "integer", "minimum": 0},
        "lambda_grid": {
            "type": "object",
            "required": ["min", "max", "points"],
            "properties": {"min": {"type": "number", "exclusiveMinimum": 0}, "max": _num,
                           "points": {"type": "integer", "minimum": 2, "maximum": 100000}},
        },
        "window": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                   "minItems": 2, "maxItems": 2},
        "form": {"type": "object", "required": ["periods"]},
        "sweep": {
            "type": "object",
            "properties": {"s_values": _vec, "s_min": _num, "s_max": _num, "ratio": _num,
                           "epsilon": _num},
        },
        "expect": {"type": "object"},
        "seed": {"type": "integer"},
        "outdir": {"type": "string"},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"enum": ["spectrum", "density", "ns-fit", "dualities", "tower"]}}},
         "then": {"required": ["model"]}},
        {"if": {"properties": {"kind": {"const": "report-all"}}}, "then": {"required": ["suite"]}},
    ],
}


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise pl.InputError(f"cannot read config: {e}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise pl.InputError(f"config is not valid JSON: {e}")
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise pl.InputError(f"config invalid at {where}: {e.message}")
    model = cfg.get("model", {})
    if cfg["kind"] in ("spectrum", "density", "ns-fit", "dualities") and "type" not in model:
        raise pl.InputError("model.type is required")
    if model.get("type") == "torus" and "resolution" not in model:
        raise pl.InputError("torus model needs a resolution")
    if model.get("type") == "multiplier" and cfg["kind"] not in ("spectrum", "density", "ns-fit"):
        raise pl.InputError(f"kind {cfg['kind']!r} needs a discretized model")
    if model.get("type") == "torus" and "resolution" in model:
        limit = pl.LIMITS["circle"] if model.get("n", 2) == 1 else pl.LIMITS["torus"]
        if model["resolution"] > limit:
            raise pl.InputError(f"resolution {model['resolution']} exceeds the solver limit {limit}")
    grid = cfg.get("lambda_grid")
    if grid and not grid["max"] > grid["min"]:
        raise pl.InputError("lambda_grid.max must exceed lambda_grid.min")
    w = cfg.get("window")
    if w and not w[1] > w[0]:
        raise pl.InputError("window must be increasing")


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def environment_stamp() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "platform": platform.platform(), "threads": pl.n_threads()}


def execute(cfg: dict) -> tuple[int, dict, dict]:
    """Run a validated config. Returns (exit code, report dict, {filename: text})."""
    kind = cfg["kind"]
    sha = config_hash(cfg)
    timings = {}
    if kind == "report-all":
        rep, dt = pl.timed(pl.SUITES[cfg["suite"]])
        timings[cfg["suite"]] = dt
        artifacts = {}
    else:
        (rep, artifacts), dt = pl.timed(pl.KINDS[kind], cfg)
        timings[kind] = dt
    files = {}
    for key, text in artifacts.items():
        ext, _, tag = key.partition(":")
        stem = f"{kind}_{sha}" + (f"_{tag}" if tag else "")
        files[f"{stem}.{ext}"] = text
    body = {"config": cfg, "config_sha": sha, **rep.to_dict(),
            "environment": environment_stamp(), "wall_clock_s": timings,
            "artifacts": sorted(files)}
    files[f"{kind}_{sha}_report.json"] = json.dumps(body, indent=2, sort_keys=True, default=str) + "\n"
    body["_table"] = rep.table()
    return (0 if rep.passed else 2), body, files


def write_files(outdir: Path, files: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        with open(outdir / name, "w", newline="\n") as fh:
            fh.write(text)


def _run(cfg: dict, outdir: str | None) -> int:
    code, body, files = execute(cfg)
    write_files(Path(outdir or cfg.get("outdir", "out")), files)
    print(body["_table"])
    print(f"{'PASS' if code == 0 else 'FAIL'}: {body['title']} ({len(body['checks'])} checks)")
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="twistlab", description="Twisted L2 spectral experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--outdir")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_all = sub.add_parser("report-all", help="run a reproduction suite")
    p_all.add_argument("suite", choices=sorted(pl.SUITES))
    p_all.add_argument("--outdir")
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.command == "validate":
            load_config(args.config)
            print("config OK")
            return 0
        if args.command == "report-all":
            cfg = {"schema_version": SCHEMA_VERSION, "kind": "report-all", "suite": args.suite}
        else:
            cfg = load_config(args.config)
        code = _run(cfg, args.outdir)
    except (pl.InputError, NotMorseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except MemoryError:
        print("error: problem too large for available memory", file=sys.stderr)
        return 1
    print(f"wall clock {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
