#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Функціонал енергії Φ, узагальнений многовид Нехарі 𝓜 і редукція до сфери S⁺.

Точки півпростору Ê(w) = E⁻ ⊕ ℝ⁺ŵ записуються як u = s·ŵ + Q⁻c, де ŵ = w⁺/‖w⁺‖,
Q⁻ — ℓ²-ортонормований власний базис E⁻, а c — координати в ньому. У цих
координатах
    Φ(u) = ½s² − ½Σ_j |λ_j| c_j² − Σ_x F(x, u(x)),
і по c функція строго вгнута (F опукла: f(u)/|u| зростає від нуля), тому внутрішня задача
зводиться до одновимірного профілю H(s) = max_c Φ(sŵ + Q⁻c).
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

import config
from errors import (
    DomainError,
    HypothesisViolation,
    InnerMaximizationError,
    NonconvergenceError,
    UniquenessAuditError,
)
from lattice import LatticeTorus, VertexFunction
from nonlinearity import Nonlinearity
from spectral import (
    SchrodingerOperator,
    SpectralSplit,
    assemble_operator,
    eigendecompose,
    equivalent_norm,
    project,
    spectral_split,
)
from utils import get_logger

log = get_logger("variational")


@dataclass(frozen=True, eq=False)
class Problem:
    torus: LatticeTorus
    operator: SchrodingerOperator
    split: SpectralSplit
    nl: Nonlinearity

    def __post_init__(self):
        if not (self.operator.torus == self.split.torus == self.nl.torus == self.torus):
            raise DomainError("компоненти задачі задані на різних торах")
        if not self.split.report.passed:
            raise HypothesisViolation("немає спектральної щілини", report=self.split.report)


def build_problem(torus: LatticeTorus, potential: VertexFunction, nl: Nonlinearity,
                  gap_tol: float = config.GAP_TOL) -> Problem:
    op = assemble_operator(torus, potential)
    split = spectral_split(eigendecompose(op), gap_tol)
    return Problem(torus=torus, operator=op, split=split, nl=nl)


@dataclass(frozen=True)
class InnerOptions:
    tol: float = config.INNER_TOL
    max_iters: int = config.INNER_MAX_ITERS
    uniqueness_audit: bool = True
    agreement_tol: float = 1e-7


@dataclass(frozen=True, eq=False)
class NehariPoint:
    u: VertexFunction
    energy: float
    s: float
    v_minus: VertexFunction
    w_hat: VertexFunction
    coords: np.ndarray
    residual_nehari: Tuple[float, float]
    norm_plus: float
    norm_minus: float
    gradient_norm: float


# ----------------- Φ І ЙОГО ПОХІДНА -----------------

def _check_torus(prob: Problem, u: VertexFunction) -> None:
    if u.torus != prob.torus:
        raise DomainError("функція задана на іншому торі")


def phi(prob: Problem, u: VertexFunction) -> float:
    """Φ(u) = ½(Lu,u) − Σ_x F(x,u(x))."""
    _check_torus(prob, u)
    quadratic = float(u.values @ (prob.operator.matrix @ u.values))
    return 0.5 * quadratic - float(np.sum(prob.nl.F_of(u)))


def phi_from_split(prob: Problem, u: VertexFunction) -> float:
    """Φ(u) = ½(‖u⁺‖² − ‖u⁻‖²) − ΣF."""
    plus, minus = project(prob.split, u)
    return 0.5 * (equivalent_norm(prob.split, plus) ** 2 - equivalent_norm(prob.split, minus) ** 2) \
        - float(np.sum(prob.nl.F_of(u)))


def phi_gradient(prob: Problem, u: VertexFunction) -> VertexFunction:
    """r(x) = (−Δu)(x) + V(x)u(x) − f(x,u(x)), представник Φ′(u) у парі (·,·)."""
    _check_torus(prob, u)
    return VertexFunction(prob.operator.matrix @ u.values - prob.nl.f_of(u), u.torus)


def critical_energy(prob: Problem, u: VertexFunction) -> float:
    """Σ(½f(x,u)u − F(x,u)); збігається з Φ(u) у критичних точках."""
    return float(np.sum(0.5 * prob.nl.f_of(u) * u.values - prob.nl.F_of(u)))


def nehari_residual(prob: Problem, u: VertexFunction, tol: float = config.ABS_TOL) -> Tuple[float, float]:
    """(|Φ′(u)u|, max_j |Φ′(u)e⁻_j|); для u ∈ E⁻ — DomainError."""
    plus, _ = project(prob.split, u)
    if equivalent_norm(prob.split, plus) <= tol:
        raise DomainError("u ∈ E⁻: многовид Нехарі не містить E⁻")
    r = phi_gradient(prob, u).values
    first = abs(float(r @ u.values))
    q = prob.split.basis_minus
    second = float(np.max(np.abs(q.T @ r))) if q.shape[1] else 0.0
    return first, second


def in_nehari(prob: Problem, u: VertexFunction, tol: float = 1e-8) -> bool:
    try:
        first, second = nehari_residual(prob, u)
    except DomainError:
        return False
    scale = tol * (1.0 + equivalent_norm(prob.split, u))
    return first <= scale and second <= scale


# ----------------- ВНУТРІШНЯ МАКСИМІЗАЦІЯ НА Ê(w) -----------------

class _Fiber:
    """Φ на Ê(ŵ) у координатах (s, c) з градієнтом і гесіаном."""

    def __init__(self, prob: Problem, w_hat: VertexFunction, opts: InnerOptions):
        self.prob = prob
        self.opts = opts
        self.w = w_hat.values
        self.q = prob.split.basis_minus
        self.lam = np.abs(prob.split.eig_minus)
        self.x = np.arange(prob.torus.vertex_count)
        self.k = self.q.shape[1]

    def point(self, s: float, c: np.ndarray) -> np.ndarray:
        return s * self.w + self.q @ c

    def value(self, s: float, c: np.ndarray) -> float:
        u = self.point(s, c)
        return 0.5 * s * s - 0.5 * float(np.dot(self.lam * c, c)) - float(np.sum(self.prob.nl.F(self.x, u)))

    def gradient(self, s: float, c: np.ndarray) -> Tuple[float, np.ndarray]:
        fu = self.prob.nl.f(self.x, self.point(s, c))
        return s - float(fu @ self.w), -self.lam * c - self.q.T @ fu

    def hessian(self, s: float, c: np.ndarray):
        d = self.prob.nl.derivative(self.x, self.point(s, c))
        h_ss = 1.0 - float(d @ (self.w * self.w))
        h_sc = -self.q.T @ (d * self.w)
        h_cc = -np.diag(self.lam) - self.q.T @ (d[:, None] * self.q)
        return h_ss, h_sc, h_cc

    def solve_c(self, s: float, c0: np.ndarray) -> np.ndarray:
        """argmax_c Φ(sŵ + Q⁻c): Ньютон з backtracking, задача строго вгнута."""
        if self.k == 0:
            return np.zeros(0)
        c = np.array(c0, dtype=np.float64)
        value = self.value(s, c)
        for _ in range(self.opts.max_iters):
            _, g = self.gradient(s, c)
            if np.linalg.norm(g) <= 1e-2 * self.opts.tol * (1.0 + abs(value)):
                return c
            _, _, h_cc = self.hessian(s, c)
            step = -np.linalg.solve(h_cc, g)
            if float(step @ g) <= 0:  # гесіан не від'ємно визначений: крок градієнта
                step = g
            t = 1.0
            while t > 1e-12:
                trial = c + t * step
                trial_value = self.value(s, trial)
                if trial_value >= value - 1e-15 * (1.0 + abs(value)):
                    break
                t *= 0.5
            if np.linalg.norm(t * step) <= 1e-16 * (1.0 + np.linalg.norm(c)):
                return trial
            c, value = trial, trial_value
        raise NonconvergenceError(f"розв'язок по E⁻ не зійшовся за {self.opts.max_iters} ітерацій", best=c)

    def profile(self, s: float, c0: np.ndarray):
        """(H(s), H′(s), H″(s), c*(s))."""
        c = self.solve_c(s, c0)
        value = self.value(s, c)
        g_s, _ = self.gradient(s, c)
        h_ss, h_sc, h_cc = self.hessian(s, c)
        second = h_ss - float(h_sc @ np.linalg.solve(h_cc, h_sc)) if self.k else h_ss
        return value, g_s, second, c


def _bracket(fiber: _Fiber, c0: np.ndarray):
    """
    [lo, hi] з H′(lo) > 0 і H(hi) < 0, H′(hi) < 0. hi подвоюється від 1:
    за надквадратичністю F Φ ≤ 0 на Ê(w) поза деякою кулею B_R(0).
    """
    hi, c_hi = 1.0, c0
    for _ in range(200):
        value, slope, _, c_hi = fiber.profile(hi, c_hi)
        if value < 0 and slope < 0:
            break
        hi *= 2.0
    else:
        raise InnerMaximizationError("не знайдено радіус R з Φ < 0 на Ê(w): рекомендовано аудит гіпотез")
    lo, c_lo = hi, c_hi
    for _ in range(200):
        lo *= 0.5
        _, slope, _, c_lo = fiber.profile(lo, c_lo)
        if slope > 0:
            return lo, hi, c_lo, c_hi
    raise InnerMaximizationError("s колапсує до 0: додатного максимуму на Ê(w) немає, рекомендовано аудит гіпотез")


def _root_brent(fiber: _Fiber, lo: float, hi: float, c0: np.ndarray):
    state = {"c": c0}

    def slope(s):
        _, g, _, c = fiber.profile(s, state["c"])
        state["c"] = c
        return g

    s = optimize.brentq(slope, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=fiber.opts.max_iters)
    return s, fiber.solve_c(s, state["c"])


def _root_newton(fiber: _Fiber, s0: float, c0: np.ndarray, lo: float = 0.0, hi: float = np.inf):
    """Захищений Ньютон для H′(s) = 0: вихід за [lo, hi] або H″ ≥ 0 — бісекція."""
    s, c = s0, c0
    for _ in range(fiber.opts.max_iters):
        value, slope, second, c = fiber.profile(s, c)
        if abs(slope) <= 1e-2 * fiber.opts.tol * (1.0 + abs(value)):
            return s, c
        if slope > 0:
            lo = max(lo, s)
        else:
            hi = min(hi, s)
        candidate = s - slope / second if second < 0 else None
        if candidate is None or not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * s
        if abs(candidate - s) <= 1e-15 * max(1.0, s):
            return candidate, fiber.solve_c(candidate, c)
        s = candidate
    raise NonconvergenceError(f"Ньютон по s не зійшовся за {fiber.opts.max_iters} ітерацій", best=(s, c))


def _make_point(prob: Problem, fiber: _Fiber, w_hat: VertexFunction, s: float, c: np.ndarray) -> NehariPoint:
    u = VertexFunction(fiber.point(s, c), prob.torus)
    g_s, g_c = fiber.gradient(s, c)
    v_minus = VertexFunction(fiber.q @ c, prob.torus)
    return NehariPoint(
        u=u,
        energy=phi(prob, u),
        s=float(s),
        v_minus=v_minus,
        w_hat=w_hat,
        coords=np.array(c),
        residual_nehari=nehari_residual(prob, u),
        norm_plus=float(s),
        norm_minus=float(np.sqrt(np.dot(fiber.lam * c, c))),
        gradient_norm=float(np.sqrt(g_s * g_s + float(g_c @ g_c))),
    )


def unit_direction(prob: Problem, w: VertexFunction, tol: float = config.ABS_TOL) -> VertexFunction:
    """ŵ = w⁺/‖w⁺‖: Ê(w) = Ê(ŵ)."""
    _check_torus(prob, w)
    plus, _ = project(prob.split, w)
    norm = equivalent_norm(prob.split, plus)
    if norm <= tol:
        raise DomainError("w ∈ E⁻: напрям у E⁺ не визначений")
    return plus / norm


def inner_maximize(prob: Problem, w: VertexFunction, opts: InnerOptions = InnerOptions(),
                   warm: Optional[NehariPoint] = None) -> NehariPoint:
    """
    m̂(w): єдиний глобальний максимум Φ на Ê(w).

    Старти: (a) Брент на [lo, R] від v⁻ = 0, (b) захищений Ньютон від s = R/2,
    (c) попередня ітерація `warm`. З uniqueness_audit=False і `warm` — лише (c),
    з відкатом на (a), якщо він не зійшовся.
    """
    w_hat = unit_direction(prob, w)
    fiber = _Fiber(prob, w_hat, opts)

    if fiber.k == 0 and prob.nl.homogeneous:
        # класичне масштабування Нехарі: s^{p−2} = ‖ŵ‖² / (p·ΣF(ŵ))
        p = prob.nl.p
        mass = p * float(np.sum(prob.nl.F(fiber.x, fiber.w)))
        if mass <= 0:
            raise InnerMaximizationError("ΣF(ŵ) ≤ 0: рекомендовано аудит гіпотез")
        s = mass ** (-1.0 / (p - 2.0))
        return _finish(prob, fiber, w_hat, [(s, np.zeros(0))], opts)

    candidates: List[Tuple[float, np.ndarray]] = []
    if warm is not None:
        c_warm = np.array(warm.coords) if warm.coords.shape == (fiber.k,) else np.zeros(fiber.k)
        try:
            candidates.append(_root_newton(fiber, warm.s, c_warm))
        except (NonconvergenceError, np.linalg.LinAlgError):
            candidates = []
        if candidates and not opts.uniqueness_audit:
            return _finish(prob, fiber, w_hat, candidates, opts)

    lo, hi, _, c_hi = _bracket(fiber, np.zeros(fiber.k))
    candidates.append(_root_brent(fiber, lo, hi, np.zeros(fiber.k)))
    if opts.uniqueness_audit:
        candidates.append(_root_newton(fiber, 0.5 * hi, c_hi, lo, hi))
    return _finish(prob, fiber, w_hat, candidates, opts)


def _finish(prob: Problem, fiber: _Fiber, w_hat: VertexFunction,
            candidates: List[Tuple[float, np.ndarray]], opts: InnerOptions) -> NehariPoint:
    values = [fiber.value(s, c) for s, c in candidates]
    best = int(np.argmax(values))
    s_best, c_best = candidates[best]
    for s, c in candidates:
        far_s = abs(s - s_best) > opts.agreement_tol * (1.0 + s_best)
        far_c = np.linalg.norm(c - c_best) > opts.agreement_tol * (1.0 + np.linalg.norm(c_best))
        if far_s or far_c:
            raise UniquenessAuditError(
                f"старти внутрішньої максимізації не збіглися: s={[float(x) for x, _ in candidates]}",
                candidates=candidates,
            )
    point = _make_point(prob, fiber, w_hat, s_best, c_best)
    if point.gradient_norm > opts.tol * (1.0 + abs(point.energy)):
        raise NonconvergenceError(
            f"градієнт на Ê(w) {point.gradient_norm:.2e} вище допуску", best=point)
    if point.s <= 0 or point.energy <= 0:
        raise InnerMaximizationError(
            f"максимум на Ê(w) не додатний (s={point.s:.3e}, Φ={point.energy:.3e}): рекомендовано аудит гіпотез")
    return point


# ----------------- РЕДУКОВАНИЙ ФУНКЦІОНАЛ Ψ НА S⁺ -----------------

def check_sphere(prob: Problem, w: VertexFunction, tol: float = 1e-8) -> None:
    _check_torus(prob, w)
    plus, minus = project(prob.split, w)
    if equivalent_norm(prob.split, minus) > tol * (1.0 + equivalent_norm(prob.split, w)):
        raise DomainError("w ∉ E⁺")
    if abs(equivalent_norm(prob.split, plus) - 1.0) > tol:
        raise DomainError(f"‖w‖ = {equivalent_norm(prob.split, plus):.12f} ≠ 1")


def psi(prob: Problem, w: VertexFunction, opts: InnerOptions = InnerOptions(),
        warm: Optional[NehariPoint] = None) -> float:
    """Ψ(w) = Φ(m̂(w)) для w ∈ S⁺."""
    check_sphere(prob, w)
    return inner_maximize(prob, w, opts, warm).energy


def sphere_gradient_coords(prob: Problem, point: NehariPoint, b: np.ndarray) -> np.ndarray:
    """
    grad Ψ у масштабованих координатах E⁺ (‖w‖ = |b|₂), спроєктований на T_w S⁺.
    Ψ′(w)z = ‖m̂(w)⁺‖·(Φ′(m̂(w)), z).
    """
    split = prob.split
    r = phi_gradient(prob, point.u).values
    g = point.norm_plus * (split.basis_plus.T @ r) / np.sqrt(split.eig_plus)
    return g - float(g @ b) * b


def psi_gradient(prob: Problem, w: VertexFunction, point: Optional[NehariPoint] = None,
                 opts: InnerOptions = InnerOptions()) -> VertexFunction:
    """Представник Ріса Ψ′(w) у ⟨·,·⟩, обмежений на T_w S⁺."""
    check_sphere(prob, w)
    if point is None:
        point = inner_maximize(prob, w, opts)
    b = prob.split.plus_coords(w)
    b = b / np.linalg.norm(b)
    return prob.split.from_plus_coords(sphere_gradient_coords(prob, point, b))


def psi_hat(prob: Problem, w: VertexFunction, opts: InnerOptions = InnerOptions()) -> float:
    """Ψ̂(w) = Φ(m̂(w)) на E⁺∖{0}."""
    return inner_maximize(prob, w, opts).energy


def psi_hat_gradient(prob: Problem, w: VertexFunction, opts: InnerOptions = InnerOptions()) -> VertexFunction:
    """Ψ̂′(w)z = (‖m̂(w)⁺‖/‖w‖)·Φ′(m̂(w))z для всіх z ∈ E⁺."""
    point = inner_maximize(prob, w, opts)
    split = prob.split
    norm_w = equivalent_norm(split, project(split, w)[0])
    r = phi_gradient(prob, point.u).values
    a = (point.norm_plus / norm_w) * (split.basis_plus.T @ r) / split.eig_plus
    return VertexFunction(split.basis_plus @ a, prob.torus)


# ----------------- ДІАГНОСТИКА -----------------

@dataclass
class GProfile:
    s_values: np.ndarray
    totals: np.ndarray            # Σ_x g(s)(x)
    phi_differences: np.ndarray   # Φ(u + su + v) − Φ(u), обчислено напряму
    identity_error: float         # max |Φ-різниця − (−½‖v‖² + Σg)|
    g_minus_one: np.ndarray       # поточково g(−1) = −½f(x,u)u + F(x,u) − F(x,v)
    passed: bool


def g_profile(prob: Problem, point: NehariPoint, v: VertexFunction, s_grid: Sequence[float]) -> GProfile:
    """
    g(s) = f(x,u)(½(s²+2s)u + (1+s)v) + F(x,u) − F(x,z(s)), z(s) = (1+s)u + v.
    Для u ∈ 𝓜: Φ(z(s)) − Φ(u) = −½‖v‖² + Σ_x g(s)(x), і Σg < 0 при (s,v) ≠ (0,0).
    """
    _check_torus(prob, v)
    split = prob.split
    v_plus, _ = project(split, v)
    if equivalent_norm(split, v_plus) > 1e-8 * (1.0 + equivalent_norm(split, v)):
        raise DomainError("v ∉ E⁻")
    nl = prob.nl
    x = np.arange(prob.torus.vertex_count)
    u = point.u.values
    fu = nl.f(x, u)
    Fu = nl.F(x, u)
    v_norm2 = equivalent_norm(split, v) ** 2
    v_is_zero = not np.any(v.values)
    s_values = np.asarray(s_grid, dtype=np.float64)
    if np.any(s_values < -1):
        raise DomainError("s_grid має лежати в [−1, ∞)")
    totals, diffs, errors = [], [], []
    base = point.energy
    for s in s_values:
        z = (1.0 + s) * u + v.values
        g = fu * (0.5 * (s * s + 2.0 * s) * u + (1.0 + s) * v.values) + Fu - nl.F(x, z)
        totals.append(float(np.sum(g)))
        diffs.append(phi(prob, VertexFunction(z, prob.torus)) - base)
        errors.append(abs(diffs[-1] - (-0.5 * v_norm2 + totals[-1])))
    totals = np.array(totals)
    g_minus_one = -0.5 * fu * u + Fu - nl.F(x, v.values)
    trivial = (np.abs(s_values) == 0) & v_is_zero
    passed = bool(np.all(totals[~trivial] < 0) and np.all(g_minus_one <= 0))
    return GProfile(
        s_values=s_values, totals=totals, phi_differences=np.array(diffs),
        identity_error=float(max(errors)) if errors else 0.0,
        g_minus_one=g_minus_one, passed=passed,
    )


@dataclass
class MaxAudit:
    passed: bool
    samples: int
    worst_gap: float   # Φ(m̂(w)) − max_sample Φ; ≥ 0 якщо максимум глобальний


def global_max_audit(prob: Problem, point: NehariPoint, n_samples: int = 1000,
                     seed: int = 0, strict_distance: float = 1e-6) -> MaxAudit:
    """Φ(m̂(w)) ≥ Φ(s·ŵ + v) на випадкових (s, v) ∈ Ê(w), строго далі за strict_distance."""
    rng = np.random.default_rng(seed)
    q = prob.split.basis_minus
    k = q.shape[1]
    scale = 1.0 + np.linalg.norm(point.coords)
    passed = True
    worst = np.inf
    for _ in range(n_samples):
        s = rng.uniform(0.0, 2.0 * point.s + 1.0)
        c = rng.normal(size=k) * scale * rng.uniform(0.0, 1.0)
        u = VertexFunction(s * point.w_hat.values + q @ c, prob.torus)
        value = phi(prob, u)
        gap = point.energy - value
        worst = min(worst, gap)
        distance = np.hypot(s - point.s, np.linalg.norm(c - point.coords))
        if gap < -1e-12 * (1.0 + abs(point.energy)) or (distance > strict_distance and gap <= 0):
            passed = False
    return MaxAudit(passed=passed, samples=n_samples, worst_gap=float(worst))


def continuity_modulus(prob: Problem, w: VertexFunction, z: VertexFunction,
                       deltas: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
                       opts: InnerOptions = InnerOptions()) -> List[float]:
    """‖m̂(w + δz) − m̂(w)‖ уздовж дотичного z; жодної константи Ліпшиця не стверджується."""
    split = prob.split
    base = inner_maximize(prob, w, opts)
    b = split.plus_coords(w)
    b = b / np.linalg.norm(b)
    t = split.plus_coords(project(split, z)[0])
    t = t - float(t @ b) * b
    t = t / np.linalg.norm(t)
    out = []
    for delta in deltas:
        moved = split.from_plus_coords((b + delta * t) / np.linalg.norm(b + delta * t))
        point = inner_maximize(prob, moved, opts, warm=base)
        out.append(equivalent_norm(split, point.u - base.u))
    return out


def coercivity_trend(prob: Problem, points: Sequence[NehariPoint]) -> dict:
    """Ранговий тренд Φ відносно ‖u‖ на обчислених точках 𝓜 (не границя)."""
    norms = [equivalent_norm(prob.split, p.u) for p in points]
    energies = [p.energy for p in points]
    if len(points) < 3:
        return {"spearman": None, "passed": True, "points": len(points)}
    rho = float(stats.spearmanr(norms, energies)[0])
    return {"spearman": rho, "passed": bool(rho > 0), "points": len(points)}


def sphere_energy_floor(prob: Problem, alpha: float, n_samples: int = 200, seed: int = 0) -> float:
    """min Φ на випадкових точках S_α = {u ∈ E⁺ : ‖u‖ = α}; додатний для малих α."""
    rng = np.random.default_rng(seed)
    split = prob.split
    best = np.inf
    for _ in range(n_samples):
        b = rng.normal(size=split.dim_plus)
        u = split.from_plus_coords(alpha * b / np.linalg.norm(b))
        best = min(best, phi(prob, u))
    return float(best)
