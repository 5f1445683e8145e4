from pathlib import Path

from hypothesis import given, settings, strategies as hst
import pytest
import yaml

from chemostokes.config import Config, ConfigError, load_config, parse_config

FIXTURES = sorted((Path(__file__).parents[1] / "docs" / "fixtures").glob("*.yaml"))


def _errors(raw):
    with pytest.raises(ConfigError) as err:
        parse_config(raw)
    return err.value.errors


def test_defaults_are_valid():
    cfg = parse_config({})
    assert cfg == Config()
    assert cfg.make_params().kappa == 1.0


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_fixtures_round_trip(path):
    cfg = load_config(path)
    again = parse_config(yaml.safe_load(cfg.dump()))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()
    assert again.digest() == cfg.digest()


def test_kappa_bound_message():
    errs = _errors({"params": {"kappa": 2}})
    assert errs == ["params.kappa: |kappa| must be <= 1, got 2.0"]


@pytest.mark.parametrize("raw, path", [
    ({"grid": {"dim": 4, "cells": [8] * 4, "lengths": [1] * 4}}, "grid.dim"),
    ({"grid": {"cells": [3, 8]}}, "grid.cells"),
    ({"grid": {"lengths": [1.0, -1.0]}}, "grid.lengths"),
    ({"grid": {"cells": 8}}, "grid.cells"),
    ({"params": {"eps": -0.5}}, "params.eps"),
    ({"params": {"dt": 0}}, "params.dt"),
    ({"params": {"snapshot_every": 1.5}}, "params.snapshot_every"),
    ({"params": {"phi_gradient": [0, 0, -1]}}, "params.phi_gradient"),
    ({"params": {"viscosity": 1}}, "params.viscosity"),
    ({"tolerance": {"tol": 1e-2}}, "tolerance"),
    ({"initial": {"generator": "noise"}}, "initial"),
    ({"initial": {"center": [0.5]}}, "initial.center"),
    ({"output": {"save_members": "yes"}}, "output.save_members"),
    ({"sweep": {"parameter": "kappa", "values": [1.0, 0.5]}}, "sweep.values"),
    ({"sweep": {"parameter": "kappa", "values": [0.0], "norms": [["n", 2.0]]}}, "sweep.norms[0]"),
    ({"sweep": {"parameter": "mu", "values": [0.0]}}, "sweep.parameter"),
    ({"extras": {}}, "extras"),
])
def test_field_path_messages(raw, path):
    errs = _errors(raw)
    assert any(e.startswith(path + ":") for e in errs), errs


def test_all_errors_collected():
    errs = _errors({"params": {"kappa": 3, "dt": -1}, "grid": {"cells": [2, 2]}})
    assert len(errs) == 3


def test_non_mapping_and_bad_yaml(tmp_path):
    assert _errors([1, 2]) == ["<root>: expected a mapping"]
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)


@settings(max_examples=40, deadline=None)
@given(
    kappa=hst.floats(-1, 1), eps=hst.floats(0, 1), dt=hst.floats(1e-4, 1e-1), t_end=hst.floats(0.01, 10),
    cells=hst.lists(hst.integers(4, 64), min_size=2, max_size=2), seed=hst.integers(0, 2**31),
    sweep=hst.booleans(),
)
def test_round_trip_is_fixed_point(kappa, eps, dt, t_end, cells, seed, sweep):
    raw = {
        "grid": {"dim": 2, "cells": cells, "lengths": [1.0, 2.0]},
        "params": {"kappa": kappa, "eps": eps, "dt": dt, "t_end": t_end},
        "initial": {"generator": "random-smooth", "seed": seed},
    }
    if sweep:
        raw["sweep"] = {"parameter": "eps", "values": [eps + 0.1, 0.0], "norms": [["u", 2.0]]}
    cfg = parse_config(raw)
    once = parse_config(yaml.safe_load(cfg.dump()))
    assert once == cfg and parse_config(once.to_dict()) == once
