import copy
import json
from importlib import resources

import pytest

from duffing import config
from duffing.config import ConfigError, build, load, parse_strategy
from duffing.multimap import Centroid, Extreme, Oscillating, Projection

SHIPPED = sorted(p.name for p in resources.files("duffing").joinpath("configs").iterdir() if p.name.endswith(".json"))

BASE = {
    "version": 1,
    "problem": {
        "operator": {"kind": "p_laplacian", "params": {}},
        "p": 2, "b": 1.0, "grid_m": 64,
        "multimap": {"kind": "interval", "expressions": {"lo": "-1", "hi": "1"}},
    },
}


def test_minimal_config_builds():
    cfg = build(copy.deepcopy(BASE))
    assert cfg.problem.dim == 1 and cfg.problem.grid.m == 64
    assert cfg.witness is None and cfg.relax is None and cfg.lambdas is None
    assert isinstance(cfg.solver.strategy, Projection)


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_load(name):
    cfg = load(resources.files("duffing").joinpath("configs", name))
    assert cfg.witness is not None


@pytest.mark.parametrize("path", [(), ("problem",), ("problem", "multimap"), ("problem", "operator")])
def test_unknown_keys_rejected(path):
    raw = copy.deepcopy(BASE)
    block = raw
    for k in path:
        block = block[k]
    block["bogus"] = 1
    with pytest.raises(ConfigError, match="unknown keys"):
        build(raw)


def test_version_required():
    raw = copy.deepcopy(BASE)
    raw["version"] = 2
    with pytest.raises(ConfigError, match="version"):
        build(raw)


@pytest.mark.parametrize("mutate", [
    lambda r: r["problem"].update(p=1),
    lambda r: r["problem"].update(b=-1),
    lambda r: r["problem"].update(grid_m=1.5),
    lambda r: r["problem"].update(r="sin("),
    lambda r: r.update(branch={"lambdas": [0.5, 0.4]}),
    lambda r: r.update(relax={"levels": [2, 2]}),
    lambda r: r.update(solver={"damping": 1.5}),
    lambda r: r.update(check={"require": ["thm9"]}),
    lambda r: r["problem"].pop("multimap"),
])
def test_invalid_values_rejected(mutate):
    raw = copy.deepcopy(BASE)
    mutate(raw)
    with pytest.raises(ConfigError):
        build(raw)


def test_strategies():
    assert isinstance(parse_strategy("projection", 1), Projection)
    assert isinstance(parse_strategy({"kind": "centroid"}, 1), Centroid)
    e = parse_strategy({"kind": "extreme", "direction": [0, 1], "seed": 4}, 2)
    assert isinstance(e, Extreme) and e.direction == (0, 1) and e.seed == 4
    assert parse_strategy({"kind": "oscillating", "level": 3}, 1) == Oscillating(3)
    with pytest.raises(ConfigError):
        parse_strategy({"kind": "extreme", "direction": [1]}, 2)
    with pytest.raises(ConfigError):
        parse_strategy("random", 1)


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="config parse"):
        load(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load(tmp_path / "missing.json")


def test_roundtrip_through_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(BASE))
    assert load(p).raw == BASE
    assert config.THEOREMS == ("thm6", "thm7", "thm8")
