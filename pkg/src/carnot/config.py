"""Run configuration: JSON-loadable knobs for the pipeline CLI.

Every field is validated with a field-path error message, and the
resolved configuration has a canonical JSON form whose sha256 hash is
embedded in run outputs so reruns are attributable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from fractions import Fraction

DEFAULT_SEEDS = {"alpha": 0, "pairs": 0, "certify": 0}
MODES = ("single", "union")


@dataclass
class RunConfig:
    delta: float = 0.05
    p: float = 2.0
    tau: float = 4.0
    h: str = "1/8"
    R: str = "1"
    c1: float = 1.0
    alpha_threshold: float = 0.03
    L_scale: float = 1.0
    L_mult: int = 12
    seeds: dict = field(default_factory=lambda: dict(DEFAULT_SEEDS))
    mode: str = "single"

    def h_fraction(self):
        return Fraction(self.h)

    def R_fraction(self):
        return Fraction(self.R)

    def canonical_json(self):
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def sha256(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _fail(path, msg):
    raise ValueError(f"config.{path}: {msg}")


def _check_number(value, path, lo=None, hi=None, strict_lo=False,
                  strict_hi=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(path, f"expected an integer, got {value!r}")
    if lo is not None and (value <= lo if strict_lo else value < lo):
        op = ">" if strict_lo else ">="
        _fail(path, f"must be {op} {lo}, got {value}")
    if hi is not None and (value >= hi if strict_hi else value > hi):
        op = "<" if strict_hi else "<="
        _fail(path, f"must be {op} {hi}, got {value}")
    return value


def _check_fraction(value, path):
    if not isinstance(value, (str, int)):
        _fail(path, f"expected an exact number as a string, got {value!r}")
    try:
        f = Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        _fail(path, f"not a valid fraction: {value!r}")
    if f <= 0:
        _fail(path, f"must be positive, got {value!r}")
    return str(value)


def validate_config(data):
    """Dict -> RunConfig, rejecting unknown keys and out-of-range
    values with the offending field path."""
    if not isinstance(data, dict):
        raise ValueError("config: expected a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"config.{unknown[0]}: unknown field")
    cfg = RunConfig()
    if "delta" in data:
        cfg.delta = float(_check_number(data["delta"], "delta", lo=0, hi=1,
                                        strict_lo=True, strict_hi=True))
    if "p" in data:
        cfg.p = float(_check_number(data["p"], "p", lo=1))
    if "tau" in data:
        cfg.tau = float(_check_number(data["tau"], "tau", lo=1, strict_lo=True))
    if "h" in data:
        cfg.h = _check_fraction(data["h"], "h")
    if "R" in data:
        cfg.R = _check_fraction(data["R"], "R")
    if Fraction(cfg.h) > Fraction(cfg.R):
        _fail("h", f"must be <= R, got h={cfg.h}, R={cfg.R}")
    if "c1" in data:
        cfg.c1 = float(_check_number(data["c1"], "c1", lo=0, strict_lo=True))
    if "alpha_threshold" in data:
        cfg.alpha_threshold = float(_check_number(
            data["alpha_threshold"], "alpha_threshold", lo=0, strict_lo=True))
    if "L_scale" in data:
        cfg.L_scale = float(_check_number(
            data["L_scale"], "L_scale", lo=0, strict_lo=True))
    if "L_mult" in data:
        cfg.L_mult = int(_check_number(
            data["L_mult"], "L_mult", lo=1, integer=True))
    if "seeds" in data:
        seeds = data["seeds"]
        if not isinstance(seeds, dict):
            _fail("seeds", f"expected an object, got {seeds!r}")
        merged = dict(DEFAULT_SEEDS)
        for key, value in seeds.items():
            if key not in DEFAULT_SEEDS:
                _fail(f"seeds.{key}", "unknown seed name")
            merged[key] = int(_check_number(
                value, f"seeds.{key}", lo=0, integer=True))
        cfg.seeds = merged
    if "mode" in data:
        if data["mode"] not in MODES:
            _fail("mode", f"must be one of {MODES}, got {data['mode']!r}")
        cfg.mode = data["mode"]
    return cfg


def load_config(path):
    """Read and validate a JSON config file; None -> defaults."""
    if path is None:
        return RunConfig()
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config: invalid JSON ({exc})") from exc
    return validate_config(data)
