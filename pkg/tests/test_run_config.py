import json
import os

import numpy as np
import pytest

import run_config
from errors import ConfigError
from solver import SolveOptions

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


def base(**changes):
    data = {
        "lattice": {"dim": 1, "sides": [16], "period": 2},
        "potential": {"kind": "staggered", "amplitude": 1.0, "shift": -2.0},
        "nonlinearity": {"kind": "power", "p": 4, "weight": 1.0},
        "solver": {"n_starts": 16, "seed": 7},
    }
    for key, value in changes.items():
        data[key] = value
    return data


@pytest.mark.parametrize("name", sorted(os.listdir(CONFIGS)))
def test_shipped_configs_round_trip(name):
    cfg = run_config.load_config(os.path.join(CONFIGS, name))
    assert run_config.parse_config(run_config.dumps(cfg)) == cfg


def test_defaults_filled():
    cfg = run_config.from_dict(base())
    assert cfg.solver == SolveOptions(n_starts=16, seed=7)
    assert cfg.output.formats == ("json", "csv")
    assert not cfg.output.emit_plot_data
    assert cfg.lattice.sides == (16,)


@pytest.mark.parametrize("data, fragment", [
    (base(lattice={"dim": 1, "sides": [16], "period": 2, "boundary": "open"}), "'lattice.boundary'"),
    (base(solver={"n_start": 3}), "'solver.n_start'"),
    (base(potential={"kind": "staggered", "amplitude": 1.0, "value": 2.0}), "'potential.value'"),
    (base(nonlinearity={"kind": "logarithmic", "p": 4}), "'nonlinearity.p'"),
    (dict(base(), extra=1), "'config.extra'"),
])
def test_unknown_keys_name_the_path(data, fragment):
    with pytest.raises(ConfigError) as err:
        run_config.from_dict(data)
    assert fragment in str(err.value)


def test_json_error_reports_position():
    with pytest.raises(ConfigError) as err:
        run_config.parse_config('{\n  "lattice": {"dim": 1,\n}', source="bad.json")
    assert "bad.json: рядок 3" in str(err.value)


def test_missing_file():
    with pytest.raises(ConfigError):
        run_config.load_config("/nonexistent/nehari.json")


def test_staggered_needs_even_period():
    with pytest.raises(ConfigError):
        run_config.from_dict(base(lattice={"dim": 1, "sides": [9], "period": 3}))


@pytest.mark.parametrize("data", [
    base(potential={"kind": "table", "cell": [1.0, 2.0, 3.0]}),
    base(nonlinearity={"kind": "power", "p": 4, "weight": [1.0]}),
])
def test_cell_lengths_checked(data):
    with pytest.raises(ConfigError):
        run_config.from_dict(data)


@pytest.mark.parametrize("data", [
    base(lattice={"dim": True, "sides": [16], "period": 2}),
    base(solver={"seed": 1.5}),
    base(solver={"polish": 1}),
    base(nonlinearity={"kind": "power", "p": "4"}),
    base(solver={"method": "newton"}),
    base(output={"formats": ["xml"]}),
])
def test_bad_types(data):
    with pytest.raises(ConfigError):
        run_config.from_dict(data)


def test_staggered_potential_values():
    cfg = run_config.from_dict(base())
    torus = run_config.make_torus(cfg)
    v = run_config.make_potential(cfg, torus).values
    assert np.array_equal(v[:4], [-1.0, -3.0, -1.0, -3.0])


def test_table_blocks_follow_cells():
    cfg = run_config.from_dict(base(
        lattice={"dim": 2, "sides": [4, 4], "period": 2},
        potential={"kind": "table", "cell": [-3.0, -5.0, -5.0, -3.0]},
        nonlinearity={"kind": "logarithmic", "weight": [1.0, 2.0, 2.0, 1.0]},
    ))
    torus = run_config.make_torus(cfg)
    v = run_config.make_potential(cfg, torus).grid()
    assert v[0, 0] == -3.0 and v[0, 1] == -5.0 and v[1, 0] == -5.0 and v[3, 3] == -3.0
    nl = run_config.make_nonlinearity(cfg, torus)
    assert nl.name == "logarithmic"


def test_overrides():
    cfg = run_config.from_dict(base())
    changed = run_config.with_overrides(cfg, seed=99, out_dir="/tmp/x", emit_plot_data=True)
    assert changed.solver.seed == 99
    assert changed.output.dir == "/tmp/x"
    assert changed.output.emit_plot_data
    assert run_config.with_overrides(cfg) == cfg
    assert run_config.with_side(cfg, 32).lattice.sides == (32,)
    with pytest.raises(ConfigError):
        run_config.with_side(cfg, 7)


def test_make_problem_builds_gap_instance():
    prob = run_config.make_problem(run_config.from_dict(base()))
    assert prob.split.dim_minus == 8
    assert prob.split.dim_plus == 8
    assert json.loads(run_config.dumps(run_config.from_dict(base())))["potential"]["shift"] == -2.0
