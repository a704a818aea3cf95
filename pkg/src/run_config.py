#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Файл запуску: один JSON-документ з блоками lattice, potential, nonlinearity,
solver, output. Невідомий ключ — ConfigError з повним шляхом до поля.

    {
      "lattice": {"dim": 1, "sides": [16], "period": 2},
      "potential": {"kind": "staggered", "amplitude": 1.0, "shift": -2.0},
      "nonlinearity": {"kind": "power", "p": 4, "weight": 1.0},
      "solver": {"n_starts": 16, "seed": 7},
      "output": {"dir": "out", "prefix": "staggered"}
    }
"""
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ConfigError
from lattice import LatticeTorus, VertexFunction, build_torus
from nonlinearity import Nonlinearity, logarithmic_nonlinearity, power_nonlinearity, table_nonlinearity
from solver import SolveOptions
from variational import Problem, build_problem

POTENTIAL_KEYS = {
    "constant": {"value"},
    "staggered": {"amplitude", "shift"},
    "table": {"cell"},
}
NONLINEARITY_KEYS = {
    "power": {"p", "weight"},
    "logarithmic": {"weight"},
    "table": {"u", "f", "p", "a", "weight"},
}
OUTPUT_FORMATS = ("json", "csv")

Weight = Union[float, Tuple[float, ...]]


@dataclass(frozen=True)
class LatticeBlock:
    dim: int
    sides: Tuple[int, ...]
    period: int


@dataclass(frozen=True)
class PotentialBlock:
    kind: str
    value: Optional[float] = None
    amplitude: Optional[float] = None
    shift: Optional[float] = None
    cell: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class NonlinearityBlock:
    kind: str
    p: Optional[float] = None
    weight: Weight = 1.0
    u: Optional[Tuple[float, ...]] = None
    f: Optional[Tuple[float, ...]] = None
    a: Optional[float] = None


@dataclass(frozen=True)
class OutputBlock:
    dir: str = "out"
    prefix: str = "nehari"
    formats: Tuple[str, ...] = OUTPUT_FORMATS
    emit_plot_data: bool = False


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeBlock
    potential: PotentialBlock
    nonlinearity: NonlinearityBlock
    solver: SolveOptions = field(default_factory=SolveOptions)
    output: OutputBlock = field(default_factory=OutputBlock)


# ----------------- ПЕРЕВІРКА ТИПІВ -----------------

def _check_keys(block: Any, allowed, path: str) -> Dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: очікувався об'єкт, отримано {type(block).__name__}")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"невідомий ключ '{path}.{key}'")
    return block


def _require(block: Dict, key: str, path: str):
    if key not in block:
        raise ConfigError(f"відсутній обов'язковий ключ '{path}.{key}'")
    return block[key]


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: очікувалось ціле число, отримано {value!r}")
    return value


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: очікувалось число, отримано {value!r}")
    if not np.isfinite(value):
        raise ConfigError(f"{path}: значення має бути скінченним, отримано {value!r}")
    return float(value)


def _float_list(value: Any, path: str) -> Tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{path}: очікувався список чисел")
    return tuple(_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: очікувалось true/false, отримано {value!r}")
    return value


# ----------------- БЛОКИ -----------------

def _parse_lattice(block: Any) -> LatticeBlock:
    block = _check_keys(block, {"dim", "sides", "period"}, "lattice")
    dim = _int(_require(block, "dim", "lattice"), "lattice.dim")
    sides = _require(block, "sides", "lattice")
    if not isinstance(sides, list):
        raise ConfigError("lattice.sides: очікувався список цілих")
    sides = tuple(_int(s, f"lattice.sides[{i}]") for i, s in enumerate(sides))
    period = _int(_require(block, "period", "lattice"), "lattice.period")
    build_torus(dim, sides, period)
    return LatticeBlock(dim=dim, sides=sides, period=period)


def _parse_potential(block: Any, lattice: LatticeBlock) -> PotentialBlock:
    kind = _require(_check_keys(block, {"kind"} | set().union(*POTENTIAL_KEYS.values()), "potential"),
                    "kind", "potential")
    if kind not in POTENTIAL_KEYS:
        raise ConfigError(f"potential.kind: очікувалось одне з {sorted(POTENTIAL_KEYS)}, отримано {kind!r}")
    _check_keys(block, {"kind"} | POTENTIAL_KEYS[kind], "potential")
    if kind == "constant":
        return PotentialBlock(kind=kind, value=_float(_require(block, "value", "potential"), "potential.value"))
    if kind == "staggered":
        if lattice.period % 2:
            raise ConfigError(f"potential.kind='staggered' потребує парного періоду, отримано {lattice.period}")
        return PotentialBlock(
            kind=kind,
            amplitude=_float(_require(block, "amplitude", "potential"), "potential.amplitude"),
            shift=_float(block.get("shift", 0.0), "potential.shift"),
        )
    cell = _float_list(_require(block, "cell", "potential"), "potential.cell")
    expected = lattice.period ** lattice.dim
    if len(cell) != expected:
        raise ConfigError(f"potential.cell: {len(cell)} значень, очікувалось period^dim = {expected}")
    return PotentialBlock(kind=kind, cell=cell)


def _parse_weight(value: Any, lattice: LatticeBlock, path: str) -> Weight:
    if isinstance(value, list):
        weight = _float_list(value, path)
        expected = lattice.period ** lattice.dim
        if len(weight) != expected:
            raise ConfigError(f"{path}: {len(weight)} значень, очікувалось period^dim = {expected}")
        return weight
    return _float(value, path)


def _parse_nonlinearity(block: Any, lattice: LatticeBlock) -> NonlinearityBlock:
    allowed = {"kind"} | set().union(*NONLINEARITY_KEYS.values())
    kind = _require(_check_keys(block, allowed, "nonlinearity"), "kind", "nonlinearity")
    if kind not in NONLINEARITY_KEYS:
        raise ConfigError(f"nonlinearity.kind: очікувалось одне з {sorted(NONLINEARITY_KEYS)}, отримано {kind!r}")
    _check_keys(block, {"kind"} | NONLINEARITY_KEYS[kind], "nonlinearity")
    weight = _parse_weight(block.get("weight", 1.0), lattice, "nonlinearity.weight")
    if kind == "logarithmic":
        return NonlinearityBlock(kind=kind, weight=weight)
    p = _float(_require(block, "p", "nonlinearity"), "nonlinearity.p")
    if kind == "power":
        return NonlinearityBlock(kind=kind, p=p, weight=weight)
    return NonlinearityBlock(
        kind=kind, p=p, weight=weight,
        u=_float_list(_require(block, "u", "nonlinearity"), "nonlinearity.u"),
        f=_float_list(_require(block, "f", "nonlinearity"), "nonlinearity.f"),
        a=_float(block["a"], "nonlinearity.a") if "a" in block else None,
    )


def _parse_solver(block: Any) -> SolveOptions:
    known = {f.name: f for f in fields(SolveOptions)}
    block = _check_keys(block, set(known), "solver")
    values = {}
    for key, value in block.items():
        path = f"solver.{key}"
        default = known[key].default
        if key == "sign_orbit":
            values[key] = None if value is None else _bool(value, path)
        elif isinstance(default, bool):
            values[key] = _bool(value, path)
        elif isinstance(default, int):
            values[key] = _int(value, path)
        elif isinstance(default, float):
            values[key] = _float(value, path)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{path}: очікувався рядок, отримано {value!r}")
            values[key] = value
    return SolveOptions(**values)


def _parse_output(block: Any) -> OutputBlock:
    block = _check_keys(block, {"dir", "prefix", "formats", "emit_plot_data"}, "output")
    values = {}
    for key in ("dir", "prefix"):
        if key in block:
            if not isinstance(block[key], str) or not block[key]:
                raise ConfigError(f"output.{key}: очікувався непорожній рядок")
            values[key] = block[key]
    if "formats" in block:
        formats = block["formats"]
        if not isinstance(formats, list) or any(f not in OUTPUT_FORMATS for f in formats):
            raise ConfigError(f"output.formats: допустимі значення {OUTPUT_FORMATS}")
        values["formats"] = tuple(formats)
    if "emit_plot_data" in block:
        values["emit_plot_data"] = _bool(block["emit_plot_data"], "output.emit_plot_data")
    return OutputBlock(**values)


# ----------------- ПУБЛІЧНИЙ API -----------------

def from_dict(data: Any) -> RunConfig:
    data = _check_keys(data, {"lattice", "potential", "nonlinearity", "solver", "output"}, "config")
    lattice = _parse_lattice(_require(data, "lattice", "config"))
    return RunConfig(
        lattice=lattice,
        potential=_parse_potential(_require(data, "potential", "config"), lattice),
        nonlinearity=_parse_nonlinearity(_require(data, "nonlinearity", "config"), lattice),
        solver=_parse_solver(data.get("solver", {})),
        output=_parse_output(data.get("output", {})),
    )


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: рядок {e.lineno}, колонка {e.colno}: {e.msg}") from e
    return from_dict(data)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"не вдалося прочитати конфіг {path}: {e}") from e
    return parse_config(text, source=path)


def _compact(block) -> Dict:
    out = {}
    for key, value in asdict(block).items():
        if value is None and key != "sign_orbit":
            continue
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def to_dict(cfg: RunConfig) -> Dict:
    return {
        "lattice": _compact(cfg.lattice),
        "potential": _compact(cfg.potential),
        "nonlinearity": _compact(cfg.nonlinearity),
        "solver": _compact(cfg.solver),
        "output": _compact(cfg.output),
    }


def dumps(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), ensure_ascii=False, indent=2)


def with_overrides(cfg: RunConfig, seed: Optional[int] = None, out_dir: Optional[str] = None,
                   emit_plot_data: Optional[bool] = None) -> RunConfig:
    solver, output = cfg.solver, cfg.output
    if seed is not None:
        solver = replace(solver, seed=seed)
    if out_dir is not None:
        output = replace(output, dir=out_dir)
    if emit_plot_data:
        output = replace(output, emit_plot_data=True)
    return replace(cfg, solver=solver, output=output)


def with_side(cfg: RunConfig, side: int) -> RunConfig:
    """Та сама задача на торі зі стороною `side` уздовж кожної осі."""
    sides = (int(side),) * cfg.lattice.dim
    build_torus(cfg.lattice.dim, sides, cfg.lattice.period)
    return replace(cfg, lattice=replace(cfg.lattice, sides=sides))


# ----------------- ПОБУДОВА ЗАДАЧІ -----------------

def make_torus(cfg: RunConfig) -> LatticeTorus:
    return build_torus(cfg.lattice.dim, cfg.lattice.sides, cfg.lattice.period)


def _from_cell(torus: LatticeTorus, cell: Sequence[float]) -> VertexFunction:
    return VertexFunction(np.asarray(cell, dtype=np.float64)[torus.cell_index()], torus)


def make_potential(cfg: RunConfig, torus: LatticeTorus) -> VertexFunction:
    block = cfg.potential
    if block.kind == "constant":
        return VertexFunction(np.full(torus.vertex_count, block.value), torus)
    if block.kind == "staggered":
        parity = np.sum(torus.all_coords(), axis=1) % 2
        return VertexFunction(block.amplitude * (1.0 - 2.0 * parity) + block.shift, torus)
    return _from_cell(torus, block.cell)


def make_nonlinearity(cfg: RunConfig, torus: LatticeTorus) -> Nonlinearity:
    block = cfg.nonlinearity
    if isinstance(block.weight, tuple):
        weight = _from_cell(torus, block.weight)
    else:
        weight = VertexFunction(np.full(torus.vertex_count, block.weight), torus)
    if block.kind == "power":
        return power_nonlinearity(block.p, weight)
    if block.kind == "logarithmic":
        return logarithmic_nonlinearity(weight)
    return table_nonlinearity(block.u, block.f, weight, block.p, block.a)


def make_problem(cfg: RunConfig) -> Problem:
    torus = make_torus(cfg)
    return build_problem(torus, make_potential(cfg, torus), make_nonlinearity(cfg, torus))
