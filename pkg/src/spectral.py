#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Оператор L = −Δ + V на торі, його повна спектральна декомпозиція,
перевірка спектральної щілини та розклад E = E⁺ ⊕ E⁻.

Матриці щільні: на торах до ~4096 вершин повні базиси E± потрібні так чи інакше.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

import config
from errors import DomainError, HypothesisViolation, NumericalError
from lattice import LatticeTorus, VertexFunction, laplacian_apply, laplacian_matrix
from utils import get_logger

log = get_logger("spectral")


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    torus: LatticeTorus
    potential: VertexFunction
    matrix: np.ndarray

    def apply(self, u: VertexFunction) -> VertexFunction:
        return VertexFunction(self.matrix @ u.values, u.torus)

    def apply_stencil(self, u: VertexFunction) -> VertexFunction:
        """−Δu + Vu через шаблон, без матриці (для перехресної перевірки)."""
        lap = laplacian_apply(u)
        return VertexFunction(-lap.values + self.potential.values * u.values, u.torus)


@dataclass(frozen=True, eq=False)
class Eigensystem:
    operator: SchrodingerOperator
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruction_error(self) -> float:
        q, lam = self.eigenvectors, self.eigenvalues
        rebuilt = (q * lam) @ q.T
        scale = max(np.linalg.norm(self.operator.matrix), 1.0)
        return float(np.linalg.norm(rebuilt - self.operator.matrix) / scale)


@dataclass(frozen=True)
class GapReport:
    passed: bool
    lambda_minus_max: Optional[float]
    lambda_plus_min: Optional[float]
    alpha: Optional[float]
    beta: Optional[float]
    alpha_plus: Optional[float]
    beta_plus: Optional[float]
    dim_minus: int
    dim_plus: int
    gap_tol: float
    offending: Tuple[float, ...] = ()
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "lambda_minus_max": self.lambda_minus_max,
            "lambda_plus_min": self.lambda_plus_min,
            "alpha": self.alpha,
            "beta": self.beta,
            "alpha_plus": self.alpha_plus,
            "beta_plus": self.beta_plus,
            "dim_minus": self.dim_minus,
            "dim_plus": self.dim_plus,
            "gap_tol": self.gap_tol,
            "offending": list(self.offending),
            "reason": self.reason,
        }


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    """
    Розклад за знаком спектра. basis_minus/basis_plus — ℓ²-ортонормовані
    власні вектори E⁻/E⁺, eig_minus/eig_plus — відповідні власні значення.
    """
    torus: LatticeTorus
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    split_index: int
    gap: Tuple[Optional[float], Optional[float]]
    alpha: Optional[float]
    beta: Optional[float]
    alpha_plus: float
    beta_plus: float
    report: GapReport
    basis_minus: np.ndarray = field(init=False, repr=False)
    basis_plus: np.ndarray = field(init=False, repr=False)
    eig_minus: np.ndarray = field(init=False, repr=False)
    eig_plus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = self.split_index
        object.__setattr__(self, "basis_minus", self.eigenvectors[:, :k])
        object.__setattr__(self, "basis_plus", self.eigenvectors[:, k:])
        object.__setattr__(self, "eig_minus", self.eigenvalues[:k])
        object.__setattr__(self, "eig_plus", self.eigenvalues[k:])

    @property
    def dim_minus(self) -> int:
        return self.split_index

    @property
    def dim_plus(self) -> int:
        return self.eigenvalues.shape[0] - self.split_index

    @property
    def p_minus(self) -> np.ndarray:
        return self.basis_minus @ self.basis_minus.T

    @property
    def p_plus(self) -> np.ndarray:
        return self.basis_plus @ self.basis_plus.T

    # ---- координати в E⁺, масштабовані так, що ‖w‖ = |b|₂ ----
    def plus_coords(self, u: VertexFunction) -> np.ndarray:
        return np.sqrt(self.eig_plus) * (self.basis_plus.T @ u.values)

    def from_plus_coords(self, b: np.ndarray) -> VertexFunction:
        return VertexFunction(self.basis_plus @ (b / np.sqrt(self.eig_plus)), self.torus)


def _check_periodic(torus: LatticeTorus, values: np.ndarray) -> Optional[Tuple[int, ...]]:
    grid = values.reshape(torus.sides)
    for axis in range(torus.dim):
        shifted = np.roll(grid, -torus.period, axis=axis)
        bad = np.argwhere(shifted != grid)
        if bad.size:
            return tuple(int(c) for c in bad[0])
    return None


def assemble_operator(torus: LatticeTorus, potential: VertexFunction) -> SchrodingerOperator:
    if potential.torus != torus:
        raise DomainError("потенціал заданий на іншому торі")
    offending = _check_periodic(torus, potential.values)
    if offending is not None:
        raise HypothesisViolation(
            f"потенціал не {torus.period}-періодичний: вершина {offending} "
            f"(V={potential.values[torus.index_of(offending)]})"
        )
    matrix = -laplacian_matrix(torus) + np.diag(potential.values)
    return SchrodingerOperator(torus=torus, potential=potential, matrix=matrix)


def eigendecompose(op: SchrodingerOperator) -> Eigensystem:
    try:
        eigenvalues, eigenvectors = linalg.eigh(op.matrix)
    except (linalg.LinAlgError, ValueError) as e:
        asym = float(np.linalg.norm(op.matrix - op.matrix.T))
        fro = float(np.linalg.norm(op.matrix))
        raise NumericalError(
            f"eigh не зійшовся: {e}; ‖L‖_F={fro:.3e}, ‖L−Lᵀ‖_F={asym:.3e}, "
            f"n={op.matrix.shape[0]}"
        ) from e
    return Eigensystem(operator=op, eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def check_gap(eigensystem: Eigensystem, gap_tol: float = config.GAP_TOL, strict: bool = True) -> GapReport:
    """
    Щілина: жодного власного значення в (−gap_tol, gap_tol) і E⁺ ≠ {0}.

    strict=True — кидає HypothesisViolation зі звітом усередині.
    """
    lam = eigensystem.eigenvalues
    negative = lam[lam < 0]
    positive = lam[lam > 0]
    inside = lam[np.abs(lam) < gap_tol]

    lambda_minus_max = float(negative.max()) if negative.size else None
    lambda_plus_min = float(positive.min()) if positive.size else None
    alpha = float(-negative.min()) if negative.size else None
    beta = float(-negative.max()) if negative.size else None
    alpha_plus = float(positive.max()) if positive.size else None
    beta_plus = float(positive.min()) if positive.size else None

    reason = ""
    if inside.size:
        reason = f"{inside.size} власних значень у щілині (−{gap_tol:g}, {gap_tol:g})"
    elif not positive.size:
        reason = "E⁺ = {0}: узагальнений многовид Нехарі порожній"

    report = GapReport(
        passed=not reason,
        lambda_minus_max=lambda_minus_max,
        lambda_plus_min=lambda_plus_min,
        alpha=alpha,
        beta=beta,
        alpha_plus=alpha_plus,
        beta_plus=beta_plus,
        dim_minus=int(np.sum(lam <= -gap_tol)),
        dim_plus=int(np.sum(lam >= gap_tol)),
        gap_tol=float(gap_tol),
        offending=tuple(float(x) for x in inside),
        reason=reason,
    )
    if report.passed:
        log(f"✔️ Щілина: ({lambda_minus_max}, {lambda_plus_min}), dim E⁻={report.dim_minus}, dim E⁺={report.dim_plus}")
    else:
        log(f"❌ Немає щілини: {reason} {list(report.offending)[:8]}")
        if strict:
            raise HypothesisViolation(f"немає спектральної щілини: {reason}", report=report)
    return report


def spectral_split(eigensystem: Eigensystem, gap_tol: float = config.GAP_TOL) -> SpectralSplit:
    report = check_gap(eigensystem, gap_tol, strict=True)
    return SpectralSplit(
        torus=eigensystem.operator.torus,
        eigenvalues=eigensystem.eigenvalues,
        eigenvectors=eigensystem.eigenvectors,
        split_index=report.dim_minus,
        gap=(report.lambda_minus_max, report.lambda_plus_min),
        alpha=report.alpha,
        beta=report.beta,
        alpha_plus=report.alpha_plus,
        beta_plus=report.beta_plus,
        report=report,
    )


def project(split: SpectralSplit, u: VertexFunction) -> Tuple[VertexFunction, VertexFunction]:
    if u.torus != split.torus:
        raise DomainError("функція задана на іншому торі")
    q = split.basis_minus
    minus = q @ (q.T @ u.values)
    return VertexFunction(u.values - minus, u.torus), VertexFunction(minus, u.torus)


def equivalent_inner(split: SpectralSplit, u: VertexFunction, v: VertexFunction) -> float:
    """⟨u⁺,v⁺⟩ + ⟨u⁻,v⁻⟩ = Σ_j |λ_j| (u,e_j)(v,e_j)."""
    cu = split.eigenvectors.T @ u.values
    cv = split.eigenvectors.T @ v.values
    return float(np.sum(np.abs(split.eigenvalues) * cu * cv))


def equivalent_norm(split: SpectralSplit, u: VertexFunction) -> float:
    return float(np.sqrt(max(equivalent_inner(split, u, u), 0.0)))


# ----------------- БЛОХІВСЬКИЙ ОРАКУЛ -----------------

@dataclass(frozen=True)
class BandStructure:
    thetas: np.ndarray        # (M, N) квазіімпульси
    eigenvalues: np.ndarray   # (M, Tᴺ), кожен рядок відсортований

    @property
    def bands(self) -> List[Tuple[float, float]]:
        return [(float(b.min()), float(b.max())) for b in self.eigenvalues.T]

    def all_values(self) -> np.ndarray:
        return np.sort(self.eigenvalues.reshape(-1))


def bloch_matrix(dim: int, period: int, potential_cell: Sequence[float], theta: Sequence[float]) -> np.ndarray:
    """
    Ермітова матриця Tᴺ×Tᴺ для ψ(x + T e_i) = e^{iθ_i} ψ(x).
    Сусід, що виходить за комірку, повертається в неї з фазою e^{±iθ_i}.
    """
    cell_shape = (period,) * dim
    size = period ** dim
    cell = np.asarray(potential_cell, dtype=np.float64).reshape(-1)
    if cell.shape[0] != size:
        raise DomainError(f"комірка потенціалу має {cell.shape[0]} значень, очікувалось {size}")
    h = np.zeros((size, size), dtype=np.complex128)
    h[np.arange(size), np.arange(size)] = 2.0 * dim + cell
    for site, coords in enumerate(product(range(period), repeat=dim)):
        for axis in range(dim):
            for step in (-1, 1):
                target = list(coords)
                target[axis] += step
                phase = 1.0 + 0j
                if target[axis] >= period:
                    target[axis] -= period
                    phase = np.exp(1j * theta[axis])
                elif target[axis] < 0:
                    target[axis] += period
                    phase = np.exp(-1j * theta[axis])
                h[site, np.ravel_multi_index(tuple(target), cell_shape)] -= phase
    return h


def bloch_spectrum(dim: int, period: int, potential_cell: Sequence[float], k_samples) -> BandStructure:
    """
    k_samples — кількість точок на вісь (рівномірна сітка θ = 2πm/k) або
    явний масив квазіімпульсів форми (M, N).
    """
    if np.isscalar(k_samples):
        axis = 2.0 * np.pi * np.arange(int(k_samples)) / int(k_samples)
        thetas = np.array(list(product(axis, repeat=dim)), dtype=np.float64).reshape(-1, dim)
    else:
        thetas = np.asarray(k_samples, dtype=np.float64).reshape(-1, dim)
    values = np.array([
        linalg.eigvalsh(bloch_matrix(dim, period, potential_cell, theta)) for theta in thetas
    ])
    return BandStructure(thetas=thetas, eigenvalues=values)


def commensurate_thetas(torus: LatticeTorus) -> np.ndarray:
    """Квазіімпульси, які реалізує тор: θ_i = 2π m / (L_i/T)."""
    axes = [2.0 * np.pi * np.arange(cells) / cells for cells in torus.cells]
    return np.array(list(product(*axes)), dtype=np.float64).reshape(-1, torus.dim)


def potential_cell(torus: LatticeTorus, potential: VertexFunction) -> np.ndarray:
    return potential.values[torus.cell_vertices()]
