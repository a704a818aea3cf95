#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Скінченні періодичні зрізи ґратки ℤᴺ і дискретне числення на них.

Вершини нумеруються рядково (row-major) за координатами: останній індекс
змінюється найшвидше, як у numpy.reshape(..., order="C"). Ваги ребер і міра
вершин одиничні, тому ∫ g dμ = Σ_x g(x).
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence, Tuple

import numpy as np

from errors import ConfigError, DomainError


@dataclass(frozen=True)
class LatticeTorus:
    dim: int
    sides: Tuple[int, ...]
    period: int
    neighbors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "neighbors", _neighbor_table(self.sides))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.sides

    @property
    def vertex_count(self) -> int:
        return int(np.prod(self.sides))

    @property
    def degree(self) -> int:
        return 2 * self.dim

    @property
    def cells(self) -> Tuple[int, ...]:
        """Кількість періодів T уздовж кожної осі."""
        return tuple(side // self.period for side in self.sides)

    def index_of(self, coords: Sequence[int]) -> int:
        wrapped = tuple(int(c) % s for c, s in zip(coords, self.sides))
        return int(np.ravel_multi_index(wrapped, self.sides))

    def coords_of(self, index: int) -> Tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(int(index), self.sides))

    def all_coords(self) -> np.ndarray:
        """Масив (vertex_count, N) координат у порядку нумерації."""
        grids = np.indices(self.sides).reshape(self.dim, -1)
        return grids.T.copy()

    def cell_vertices(self) -> np.ndarray:
        """Вершини періодичної комірки [0, T)ᴺ."""
        coords = self.all_coords()
        mask = np.all(coords < self.period, axis=1)
        return np.flatnonzero(mask)

    def cell_index(self) -> np.ndarray:
        """Для кожної вершини — індекс її представника у комірці [0, T)ᴺ."""
        cell_shape = (self.period,) * self.dim
        reduced = self.all_coords() % self.period
        return np.ravel_multi_index(tuple(reduced.T), cell_shape)


@dataclass(frozen=True, eq=False)
class VertexFunction:
    values: np.ndarray
    torus: LatticeTorus

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] != self.torus.vertex_count:
            raise DomainError(
                f"довжина {values.shape[0]} не дорівнює кількості вершин {self.torus.vertex_count}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("функція на вершинах містить нескінченні або NaN значення")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.torus.sides)

    def _check(self, other: "VertexFunction") -> None:
        if other.torus != self.torus:
            raise DomainError("функції задані на різних торах")

    def __add__(self, other):
        self._check(other)
        return VertexFunction(self.values + other.values, self.torus)

    def __sub__(self, other):
        self._check(other)
        return VertexFunction(self.values - other.values, self.torus)

    def __neg__(self):
        return VertexFunction(-self.values, self.torus)

    def __mul__(self, scalar: float):
        return VertexFunction(self.values * float(scalar), self.torus)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return VertexFunction(self.values / float(scalar), self.torus)


def _neighbor_table(sides: Tuple[int, ...]) -> np.ndarray:
    index = np.arange(int(np.prod(sides))).reshape(sides)
    columns = []
    for axis in range(len(sides)):
        for shift in (-1, 1):
            columns.append(np.roll(index, -shift, axis=axis).reshape(-1))
    return np.stack(columns, axis=1)


def build_torus(dim: int, sides: Sequence[int], period: int) -> LatticeTorus:
    if int(dim) < 1:
        raise ConfigError(f"розмірність має бути ≥ 1, отримано {dim}")
    if int(period) < 1:
        raise ConfigError(f"період має бути ≥ 1, отримано {period}")
    sides = tuple(int(s) for s in sides)
    if len(sides) != dim:
        raise ConfigError(f"очікувалось {dim} сторін, отримано {len(sides)}")
    for axis, side in enumerate(sides):
        if side < 3:
            raise ConfigError(f"сторона {side} (вісь {axis}) менша за 3: дублюються ребра обгортки")
        if side % period:
            raise ConfigError(f"сторона {side} (вісь {axis}) не ділиться на період {period}")
    return LatticeTorus(dim=int(dim), sides=sides, period=int(period))


def constant(torus: LatticeTorus, value: float) -> VertexFunction:
    return VertexFunction(np.full(torus.vertex_count, float(value)), torus)


def delta(torus: LatticeTorus, coords: Sequence[int]) -> VertexFunction:
    values = np.zeros(torus.vertex_count)
    values[torus.index_of(coords)] = 1.0
    return VertexFunction(values, torus)


def _check_same(u: VertexFunction, v: VertexFunction) -> None:
    if u.torus != v.torus:
        raise DomainError("функції задані на різних торах")


def laplacian_apply(u: VertexFunction) -> VertexFunction:
    """Δu(x) = Σ_{y∼x} (u(y) − u(x))."""
    grid = u.grid()
    out = -2.0 * u.torus.dim * grid
    for axis in range(u.torus.dim):
        out = out + np.roll(grid, 1, axis=axis) + np.roll(grid, -1, axis=axis)
    return VertexFunction(out.reshape(-1), u.torus)


def laplacian_matrix(torus: LatticeTorus) -> np.ndarray:
    n = torus.vertex_count
    matrix = -float(torus.degree) * np.eye(n)
    rows = np.repeat(np.arange(n), torus.degree)
    np.add.at(matrix, (rows, torus.neighbors.reshape(-1)), 1.0)
    return matrix


def gradient_form(u: VertexFunction, v: VertexFunction) -> VertexFunction:
    """Γ(u,v)(x) = ½ Σ_{y∼x} (u(y) − u(x))(v(y) − v(x))."""
    _check_same(u, v)
    nb = u.torus.neighbors
    du = u.values[nb] - u.values[:, None]
    dv = v.values[nb] - v.values[:, None]
    return VertexFunction(0.5 * np.sum(du * dv, axis=1), u.torus)


def gradient_length(u: VertexFunction) -> VertexFunction:
    return VertexFunction(np.sqrt(gradient_form(u, u).values), u.torus)


def norm_lp(u: VertexFunction, p: float) -> float:
    if p == np.inf or p == float("inf"):
        return float(np.max(np.abs(u.values)))
    if p < 1:
        raise DomainError(f"ℓᵖ-норма визначена для p ≥ 1, отримано p={p}")
    return float(np.sum(np.abs(u.values) ** p) ** (1.0 / p))


def inner_w12(u: VertexFunction, v: VertexFunction) -> float:
    """⟨u,v⟩_{W^{1,2}} = Σ_x (Γ(u,v)(x) + u(x)v(x))."""
    _check_same(u, v)
    return float(np.sum(gradient_form(u, v).values) + np.dot(u.values, v.values))


def norm_w12(u: VertexFunction) -> float:
    return float(np.sqrt(max(inner_w12(u, u), 0.0)))


def translate(u: VertexFunction, k: Sequence[int]) -> VertexFunction:
    """u(· − kT) з періодичною обгорткою; k береться за модулем L_i/T."""
    torus = u.torus
    if len(k) != torus.dim:
        raise DomainError(f"вектор зсуву має довжину {len(k)}, очікувалось {torus.dim}")
    shifts = tuple((int(ki) % cells) * torus.period for ki, cells in zip(k, torus.cells))
    moved = np.roll(u.grid(), shifts, axis=tuple(range(torus.dim)))
    return VertexFunction(moved.reshape(-1), torus)


def all_shifts(torus: LatticeTorus):
    """Усі різні зсуви k ∈ ∏ ℤ_{L_i/T}."""
    return product(*(range(cells) for cells in torus.cells))
