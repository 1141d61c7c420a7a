"""JSON run configuration: parsing, validation and construction of the problem objects.

Schema (``"version": 1``)::

    {
      "version": 1,
      "problem": {
        "operator": {"kind": ..., "params": {...}, "c0": optional},
        "p": 2, "b": 1.0, "N": 1, "grid_m": 1024,
        "r": "0.3",
        "multimap": {"kind": ..., "expressions": {...}, "inner": {...}},
        "growth_witness": {"theta": "0", "a_eta": [{"eta": 1, "profile": "1"}], "k_eta": optional}
      },
      "solver": {"strategy": "projection", "damping": 0.5, "tol": 1e-10, "max_iter": 500, "seed": 0},
      "branch": {"lambdas": [0.25, 0.5, 1.0]},
      "relax": {"levels": [2, 3, 4], "eps0": 1e-3, "eta": 1.0, "target": 1e-2, "k_eta": optional},
      "check": {"eta": 1.0, "sample_radii": [...], "trials": 200, "require": ["thm6"]}
    }

Unknown keys are rejected at every level.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import multimap as mm
from . import operators as ops
from .expr import ExpressionError, compile_time
from .grid import DiscreteFunction, Grid
from .solver import Problem

SCHEMA_VERSION = 1

_TOP = {"version", "problem", "solver", "branch", "relax", "check", "description"}
_PROBLEM = {"operator", "p", "b", "N", "grid_m", "r", "multimap", "growth_witness"}
_OPERATOR = {"kind", "params", "c0"}
_MULTIMAP = {"kind", "expressions", "inner"}
_WITNESS = {"theta", "a_eta", "k_eta"}
_A_ETA = {"eta", "profile"}
_SOLVER = {"strategy", "damping", "tol", "max_iter", "seed"}
_STRATEGY = {"kind", "direction", "seed", "level"}
_BRANCH = {"lambdas"}
_RELAX = {"levels", "eps0", "eta", "target", "k_eta", "probes"}
_CHECK = {"eta", "sample_radii", "trials", "require"}
THEOREMS = ("thm6", "thm7", "thm8")


class ConfigError(ValueError):
    pass


def _keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(block) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _num(block, key, where, default=None, lo=None, lo_open=True, integer=False):
    if key not in block:
        if default is None:
            raise ConfigError(f"missing {where}.{key}")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"{where}.{key} must be a finite number")
    if integer and int(v) != v:
        raise ConfigError(f"{where}.{key} must be an integer")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"{where}.{key} out of range")
    return int(v) if integer else float(v)


@dataclass
class SolverSettings:
    strategy: object = field(default_factory=mm.Projection)
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 500
    seed: int = 0


@dataclass
class RelaxSettings:
    levels: list
    eps0: float = 1e-3
    eta: float = 1.0
    target: float = 1e-2
    k_eta: float | None = None
    probes: int = 5


@dataclass
class CheckSettings:
    eta: float = 1.0
    sample_radii: tuple = (10.0, 100.0, 1000.0, 10000.0)
    trials: int = 200
    require: tuple | None = None


@dataclass
class Config:
    raw: dict
    problem: Problem
    witness: mm.GrowthWitness | None
    solver: SolverSettings
    lambdas: list | None
    relax: RelaxSettings | None
    check: CheckSettings


def parse_strategy(spec, dim):
    if isinstance(spec, str):
        spec = {"kind": spec}
    _keys(spec, _STRATEGY, "solver.strategy")
    kind = spec.get("kind")
    if kind == "projection":
        return mm.Projection()
    if kind == "centroid":
        return mm.Centroid()
    if kind == "extreme":
        d = spec.get("direction")
        if d is not None and len(np.atleast_1d(d)) != dim:
            raise ConfigError("strategy direction has the wrong dimension")
        return mm.Extreme(tuple(np.atleast_1d(d).tolist()) if d is not None else None, int(spec.get("seed", 0)))
    if kind == "oscillating":
        return mm.Oscillating(_num(spec, "level", "solver.strategy", lo=0, lo_open=False, integer=True))
    raise ConfigError(f"unknown selection strategy {kind!r}")


def _time_profile(src, grid, where):
    try:
        fn = compile_time(src)
        return DiscreteFunction(grid, fn(grid.t))
    except (ExpressionError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build(raw: dict) -> Config:
    _keys(raw, _TOP, "config")
    if raw.get("version") != SCHEMA_VERSION:
        raise ConfigError(f"config version must be {SCHEMA_VERSION}")
    pb = raw.get("problem")
    if pb is None:
        raise ConfigError("missing problem block")
    _keys(pb, _PROBLEM, "problem")
    p = _num(pb, "p", "problem", lo=1)
    b = _num(pb, "b", "problem", lo=0)
    dim = _num(pb, "N", "problem", default=1, lo=1, lo_open=False, integer=True)
    m = _num(pb, "grid_m", "problem", default=1024, lo=2, lo_open=False, integer=True)
    grid = Grid(b, m)
    try:
        if "operator" not in pb or "multimap" not in pb:
            raise ConfigError("problem needs operator and multimap blocks")
        _keys(pb["operator"], _OPERATOR, "problem.operator")
        op = ops.from_config(pb["operator"], dim, p)
        _check_multimap(pb["multimap"], "problem.multimap")
        F = mm.from_config(pb["multimap"], dim)
        r = _time_profile(pb.get("r", "0"), grid, "problem.r")
        prob = Problem(op, r, F, p, grid)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"problem: {exc}") from None

    witness = None
    if "growth_witness" in pb:
        gw = pb["growth_witness"]
        _keys(gw, _WITNESS, "problem.growth_witness")
        theta = _time_profile(gw.get("theta", "0"), grid, "growth_witness.theta")
        a_eta = []
        for item in gw.get("a_eta", []):
            _keys(item, _A_ETA, "growth_witness.a_eta[]")
            eta = _num(item, "eta", "growth_witness.a_eta[]", lo=0)
            a_eta.append((eta, _time_profile(item.get("profile", "0"), grid, "growth_witness.a_eta[].profile")))
        k = _num(gw, "k_eta", "growth_witness", lo=0, lo_open=False) if "k_eta" in gw else None
        witness = mm.GrowthWitness(theta, a_eta, k)

    sv = raw.get("solver", {})
    _keys(sv, _SOLVER, "solver")
    solver = SolverSettings(
        strategy=parse_strategy(sv.get("strategy", "projection"), dim),
        damping=_num(sv, "damping", "solver", default=0.5, lo=0),
        tol=_num(sv, "tol", "solver", default=1e-10, lo=0),
        max_iter=_num(sv, "max_iter", "solver", default=500, lo=1, lo_open=False, integer=True),
        seed=_num(sv, "seed", "solver", default=0, lo=0, lo_open=False, integer=True),
    )
    if solver.damping > 1:
        raise ConfigError("solver.damping must lie in (0, 1]")

    lambdas = None
    if "branch" in raw:
        _keys(raw["branch"], _BRANCH, "branch")
        lambdas = [float(x) for x in raw["branch"].get("lambdas", [])]
        if not lambdas or any(not 0 < x <= 1 for x in lambdas) or np.any(np.diff(lambdas) <= 0):
            raise ConfigError("branch.lambdas must increase within (0, 1]")

    relax = None
    if "relax" in raw:
        rx = raw["relax"]
        _keys(rx, _RELAX, "relax")
        levels = rx.get("levels")
        if not isinstance(levels, list) or not levels or any(
                isinstance(n, bool) or not isinstance(n, int) or n < 0 for n in levels) or np.any(np.diff(levels) <= 0):
            raise ConfigError("relax.levels must be increasing non-negative integers")
        relax = RelaxSettings(
            levels=levels,
            eps0=_num(rx, "eps0", "relax", default=1e-3, lo=0),
            eta=_num(rx, "eta", "relax", default=1.0, lo=0),
            target=_num(rx, "target", "relax", default=1e-2, lo=0),
            k_eta=_num(rx, "k_eta", "relax", lo=0, lo_open=False) if "k_eta" in rx else None,
            probes=_num(rx, "probes", "relax", default=5, lo=1, lo_open=False, integer=True),
        )

    ck = raw.get("check", {})
    _keys(ck, _CHECK, "check")
    radii = tuple(float(x) for x in ck.get("sample_radii", CheckSettings.sample_radii))
    require = ck.get("require")
    if require is not None:
        if not isinstance(require, list) or any(x not in THEOREMS for x in require):
            raise ConfigError(f"check.require must list names from {THEOREMS}")
        require = tuple(require)
    check = CheckSettings(
        eta=_num(ck, "eta", "check", default=1.0, lo=0),
        sample_radii=radii,
        trials=_num(ck, "trials", "check", default=200, lo=1, lo_open=False, integer=True),
        require=require,
    )
    return Config(raw, prob, witness, solver, lambdas, relax, check)


def _check_multimap(spec, where):
    _keys(spec, _MULTIMAP, where)
    if "inner" in spec:
        _check_multimap(spec["inner"], where + ".inner")


def load(path) -> Config:
    """Read and validate a config file; every failure is a :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse: {exc.msg} at line {exc.lineno}") from None
    return build(raw)
