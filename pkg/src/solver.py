#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Мінімізація Ψ на одиничній сфері S⁺ ⊂ E⁺, градієнтний потік, пошук з багатьох
стартів і розбиття знайдених розв'язків на класи орбіт зсувів.

Точки сфери зберігаються в масштабованих координатах E⁺ (spectral.plus_coords),
де еквівалентна норма — евклідова, тож ретракція — звичайне нормування.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

import config
from errors import (
    ConfigError,
    DomainError,
    InnerMaximizationError,
    NehariError,
    NonconvergenceError,
    StagnationError,
)
from lattice import VertexFunction, all_shifts, translate
from spectral import equivalent_norm, project
from utils import get_logger
from variational import (
    InnerOptions,
    NehariPoint,
    Problem,
    check_sphere,
    inner_maximize,
    nehari_residual,
    phi,
    phi_gradient,
    sphere_gradient_coords,
    unit_direction,
)

log = get_logger("solver")

METHODS = ("descent", "flow")


@dataclass(frozen=True)
class SolveOptions:
    tol_grad: float = config.TOL_GRAD
    max_iters: int = config.MAX_ITERS
    n_starts: int = 8
    seed: int = 0
    flow_step: float = 0.5
    orbit_tol: float = config.ORBIT_TOL
    inner_tol: float = config.INNER_TOL
    uniqueness_audit: bool = True
    polish: bool = True
    workers: int = 1
    sign_orbit: Optional[bool] = None   # None — згортати знак, якщо f непарна
    method: str = "descent"

    def __post_init__(self):
        for name in ("tol_grad", "flow_step", "orbit_tol", "inner_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"solver.{name} має бути > 0, отримано {getattr(self, name)}")
        if self.max_iters < 1:
            raise ConfigError(f"solver.max_iters має бути ≥ 1, отримано {self.max_iters}")
        if self.n_starts < 1:
            raise ConfigError(f"solver.n_starts має бути ≥ 1, отримано {self.n_starts}")
        if self.workers < 1:
            raise ConfigError(f"solver.workers має бути ≥ 1, отримано {self.workers}")
        if self.method not in METHODS:
            raise ConfigError(f"solver.method: очікувалось одне з {METHODS}, отримано {self.method!r}")

    def inner(self, audit: Optional[bool] = None) -> InnerOptions:
        return InnerOptions(tol=self.inner_tol,
                            uniqueness_audit=self.uniqueness_audit if audit is None else audit)


@dataclass
class CriticalPoint:
    point: NehariPoint
    grad_norm: float
    start_index: int
    iterations: int
    orbit_class: int = -1


@dataclass
class SolveResult:
    critical_points: List[CriticalPoint]
    ground_state: CriticalPoint
    c_estimate: float
    orbit_classes: List[List[int]]   # номери стартів класу; перший — представник
    diagnostics: Dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    residual_pointwise: float
    residual_nehari: Tuple[float, float]
    energy: float
    energy_positive: bool
    norm_plus: float
    norm_minus: float
    c_hat: float
    bounds_ok: bool
    sign_audit: bool
    in_nehari: bool
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "residual_pointwise": self.residual_pointwise,
            "residual_nehari": list(self.residual_nehari),
            "energy": self.energy,
            "energy_positive": self.energy_positive,
            "norm_plus": self.norm_plus,
            "norm_minus": self.norm_minus,
            "c_hat": self.c_hat,
            "bounds_ok": self.bounds_ok,
            "sign_audit": self.sign_audit,
            "in_nehari": self.in_nehari,
            "tol": self.tol,
            "pass": self.passed,
        }


@dataclass
class FlowTrajectory:
    times: List[float]
    points: List[VertexFunction]
    psi_values: List[float]
    grad_norms: List[float]
    limit: NehariPoint
    accepted: int = 0
    rejected: int = 0
    converged: bool = False

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class OrbitComparison:
    distinct: bool
    distance: float
    shift: Optional[Tuple[int, ...]] = None
    sign: int = 1


# ----------------- СПІЛЬНІ КРОКИ -----------------

def _sphere_coords(prob: Problem, w: VertexFunction) -> np.ndarray:
    check_sphere(prob, w)
    b = prob.split.plus_coords(w)
    return b / np.linalg.norm(b)


def _retract(b: np.ndarray) -> np.ndarray:
    return b / np.linalg.norm(b)


def _stall_threshold(energy: float) -> float:
    # нижче цього рівня спад Ψ за крок тоне в похибці округлення
    return 1e-5 * (1.0 + abs(energy))


def newton_polish(prob: Problem, u: VertexFunction, tol: float = 1e-13, max_iters: int = 30) -> VertexFunction:
    """Ньютон для Lu − f(·,u) = 0 з якобіаном L − diag(∂_u f); крок зменшується, поки ‖r‖ не спаде."""
    matrix = prob.operator.matrix
    x = np.arange(prob.torus.vertex_count)
    v = np.array(u.values)
    r = matrix @ v - prob.nl.f(x, v)
    rn = np.linalg.norm(r)
    for _ in range(max_iters):
        if rn <= tol * (1.0 + np.linalg.norm(v)):
            break
        jac = matrix - np.diag(prob.nl.derivative(x, v))
        try:
            step = linalg.solve(jac, -r, assume_a="sym")
        except (linalg.LinAlgError, ValueError):
            break
        t = 1.0
        while t > 1e-4:
            trial = v + t * step
            r_trial = matrix @ trial - prob.nl.f(x, trial)
            if np.linalg.norm(r_trial) < rn:
                break
            t *= 0.5
        else:
            break
        v, r, rn = trial, r_trial, np.linalg.norm(r_trial)
    return VertexFunction(v, prob.torus)


def _finalize(prob: Problem, point: NehariPoint, b: np.ndarray, grad_norm: float,
              opts: SolveOptions) -> Tuple[NehariPoint, float]:
    """Повний аудит єдиності на кінцевій точці і, за потреби, поліровка Ньютоном."""
    point = inner_maximize(prob, point.w_hat, opts.inner(), warm=point)
    grad_norm = float(np.linalg.norm(sphere_gradient_coords(prob, point, b)))
    if not opts.polish:
        return point, grad_norm
    polished = newton_polish(prob, point.u)
    scale = 1.0 + equivalent_norm(prob.split, point.u)
    if equivalent_norm(prob.split, polished - point.u) > 1e-3 * scale:
        log(f"⚠️ Поліровка Ньютоном відійшла від точки на {equivalent_norm(prob.split, polished - point.u):.2e}: відкинуто")
        return point, grad_norm
    try:
        candidate = inner_maximize(prob, unit_direction(prob, polished), opts.inner(), warm=point)
    except (DomainError, InnerMaximizationError, NonconvergenceError) as e:
        log(f"⚠️ Поліровка Ньютоном не дала точки на 𝓜: {e}")
        return point, grad_norm
    b_new = prob.split.plus_coords(candidate.w_hat)
    b_new = b_new / np.linalg.norm(b_new)
    new_norm = float(np.linalg.norm(sphere_gradient_coords(prob, candidate, b_new)))
    if new_norm <= grad_norm:
        return candidate, new_norm
    return point, grad_norm


# ----------------- РІМАНІВ ГРАДІЄНТНИЙ СПУСК -----------------

def _descend(prob: Problem, w0: VertexFunction, opts: SolveOptions):
    """(точка, ‖grad Ψ‖, ітерації, траса [(k, Ψ, ‖grad‖)])."""
    b = _sphere_coords(prob, w0)
    split = prob.split
    trial_opts = opts.inner(audit=False)
    point = inner_maximize(prob, split.from_plus_coords(b), opts.inner())
    g = sphere_gradient_coords(prob, point, b)
    grad_norm = float(np.linalg.norm(g))
    trace: List[Tuple[int, float, float]] = []
    alpha_prev: Optional[float] = None
    contraction, sufficient = 0.5, 1e-4

    for it in range(opts.max_iters + 1):
        trace.append((it, point.energy, grad_norm))
        if grad_norm <= opts.tol_grad:
            break
        if it == opts.max_iters:
            raise NonconvergenceError(
                f"спуск не зійшовся за {opts.max_iters} ітерацій (‖grad Ψ‖={grad_norm:.2e})",
                best=point, trace=trace)

        # Armijo з ретракцією; стартовий крок — попередній прийнятий, подвоєний
        alpha = 1.0 if alpha_prev is None else 2.0 * alpha_prev
        slope = -grad_norm * grad_norm
        accepted = None
        for _ in range(60):
            b_trial = _retract(b - alpha * g)
            try:
                trial = inner_maximize(prob, split.from_plus_coords(b_trial), trial_opts, warm=point)
            except (InnerMaximizationError, NonconvergenceError):
                trial = None
            if trial is not None and trial.energy < point.energy \
                    and trial.energy <= point.energy + sufficient * alpha * slope:
                accepted = (b_trial, trial)
                break
            alpha *= contraction

        if accepted is None:
            if grad_norm <= _stall_threshold(point.energy):
                log(f"⚠️ Armijo вичерпано на рівні округлення: ‖grad Ψ‖={grad_norm:.2e}, ітерація {it}")
                break
            raise NonconvergenceError(
                f"лінійний пошук не знайшов спуску (‖grad Ψ‖={grad_norm:.2e})", best=point, trace=trace)

        b, point = accepted
        alpha_prev = alpha
        g = sphere_gradient_coords(prob, point, b)
        grad_norm = float(np.linalg.norm(g))

    iterations = trace[-1][0]
    point, grad_norm = _finalize(prob, point, b, grad_norm, opts)
    if grad_norm > opts.tol_grad:
        raise NonconvergenceError(
            f"‖grad Ψ‖={grad_norm:.2e} > tol_grad={opts.tol_grad:g} після {iterations} ітерацій",
            best=point, trace=trace)
    return point, grad_norm, iterations, trace


def minimize_sphere(prob: Problem, w0: VertexFunction, opts: SolveOptions = SolveOptions()) -> NehariPoint:
    point, grad_norm, iterations, _ = _descend(prob, w0, opts)
    log(f"✔️ Спуск: Φ={point.energy:.12g}, ‖grad Ψ‖={grad_norm:.2e}, ітерацій {iterations}")
    return point


# ----------------- ГРАДІЄНТНИЙ ПОТІК -----------------

def pseudo_gradient_flow(prob: Problem, w0: VertexFunction, opts: SolveOptions = SolveOptions(),
                         local_tol: float = 1e-4) -> FlowTrajectory:
    """
    dw/dt = −grad Ψ(w): явний Ейлер з ретракцією і контролем кроку подвоєнням
    (один крок h проти двох h/2). Записуються лише кроки зі строгим спадом Ψ.
    """
    b = _sphere_coords(prob, w0)
    split = prob.split
    trial_opts = opts.inner(audit=False)
    point = inner_maximize(prob, split.from_plus_coords(b), opts.inner())
    g = sphere_gradient_coords(prob, point, b)
    grad_norm = float(np.linalg.norm(g))
    if grad_norm <= opts.tol_grad:
        return FlowTrajectory(times=[], points=[], psi_values=[], grad_norms=[], limit=point, converged=True)

    traj = FlowTrajectory(times=[0.0], points=[split.from_plus_coords(b)], psi_values=[point.energy],
                          grad_norms=[grad_norm], limit=point)
    t, h = 0.0, opts.flow_step

    def evaluate(b_new, warm):
        try:
            return inner_maximize(prob, split.from_plus_coords(b_new), trial_opts, warm=warm)
        except (InnerMaximizationError, NonconvergenceError):
            return None

    while grad_norm > opts.tol_grad:
        if traj.accepted + traj.rejected >= opts.max_iters:
            raise NonconvergenceError(
                f"потік не зійшовся за {opts.max_iters} кроків (‖grad Ψ‖={grad_norm:.2e})",
                best=point, trace=list(zip(traj.times, traj.psi_values, traj.grad_norms)))
        full = _retract(b - h * g)
        half = _retract(b - 0.5 * h * g)
        mid = evaluate(half, point)
        new_point = None
        if mid is not None:
            two = _retract(half - 0.5 * h * sphere_gradient_coords(prob, mid, half))
            error = float(np.linalg.norm(two - full))
            if error <= local_tol:
                new_point = evaluate(two, mid)
        if new_point is not None and new_point.energy < point.energy:
            t += h
            b, point = two, new_point
            g = sphere_gradient_coords(prob, point, b)
            grad_norm = float(np.linalg.norm(g))
            traj.times.append(t)
            traj.points.append(split.from_plus_coords(b))
            traj.psi_values.append(point.energy)
            traj.grad_norms.append(grad_norm)
            traj.accepted += 1
            h *= 1.5
            continue

        traj.rejected += 1
        if new_point is not None and grad_norm <= _stall_threshold(point.energy):
            log(f"⚠️ Потік досяг рівня округлення: ‖grad Ψ‖={grad_norm:.2e}, t={t:.4g}")
            break
        h *= 0.5
        if h < 1e-14:
            raise StagnationError(f"крок потоку зник (t={t:.4g}, ‖grad Ψ‖={grad_norm:.2e})", last=point)

    point, grad_norm = _finalize(prob, point, b, grad_norm, opts)
    if grad_norm > opts.tol_grad:
        raise NonconvergenceError(f"потік зупинився з ‖grad Ψ‖={grad_norm:.2e}", best=point)
    traj.limit = point
    traj.converged = True
    log(f"✔️ Потік: Φ={point.energy:.12g}, t={t:.4g}, кроків {traj.accepted}/{traj.accepted + traj.rejected}")
    return traj


# ----------------- СТАРТИ, ОРБІТИ, ПЕРЕВІРКА -----------------

def _unit_plus(prob: Problem, values: np.ndarray) -> Optional[VertexFunction]:
    try:
        return unit_direction(prob, VertexFunction(values, prob.torus), tol=1e-8)
    except DomainError:
        return None


def start_directions(prob: Problem, opts: SolveOptions = SolveOptions()) -> List[VertexFunction]:
    """
    Меню стартів по колу: проєкція δ_x на E⁺, випадковий напрям E⁺,
    фур'є-мода, проєкція двох горбів δ_x ± δ_y. Детерміноване при заданому seed.
    """
    rng = np.random.default_rng(opts.seed)
    split = prob.split
    torus = prob.torus
    n = torus.vertex_count
    coords = torus.all_coords()
    starts: List[VertexFunction] = []
    for i in range(opts.n_starts):
        kind = i % 4
        values = np.zeros(n)
        if kind == 0:
            values[rng.integers(n)] = 1.0
        elif kind == 2:
            k = np.array([rng.integers(side) for side in torus.sides])
            phase = rng.uniform(0.0, 2.0 * np.pi)
            values = np.cos(2.0 * np.pi * (coords @ (k / np.array(torus.sides))) + phase)
        elif kind == 3:
            x, y = rng.choice(n, size=2, replace=False)
            values[x] = 1.0
            values[y] = rng.choice((-1.0, 1.0))
        w = _unit_plus(prob, values) if kind != 1 else None
        if w is None:
            b = rng.normal(size=split.dim_plus)
            w = split.from_plus_coords(b / np.linalg.norm(b))
        starts.append(w)
    return starts


def orbit_distinct(prob: Problem, u1: VertexFunction, u2: VertexFunction,
                   orbit_tol: float = config.ORBIT_TOL, sign_orbit: Optional[bool] = None) -> OrbitComparison:
    """Мінімум ‖u1 − u2(· − kT)‖ по всіх зсувах k (і по −u2, якщо знак згортається в орбіту)."""
    if u1.torus != u2.torus:
        raise DomainError("функції задані на різних торах")
    if sign_orbit is None:
        sign_orbit = prob.nl.odd
    signs = (1, -1) if sign_orbit else (1,)
    best = (np.inf, None, 1)
    for k in all_shifts(prob.torus):
        moved = translate(u2, k)
        for sign in signs:
            distance = equivalent_norm(prob.split, u1 - moved * sign)
            if distance < best[0]:
                best = (distance, tuple(k), sign)
    distance, shift, sign = best
    distinct = distance > orbit_tol * (1.0 + equivalent_norm(prob.split, u1))
    return OrbitComparison(distinct=bool(distinct), distance=float(distance),
                           shift=None if distinct else shift, sign=sign)


def verify_solution(prob: Problem, u: VertexFunction, c_hat: Optional[float] = None,
                    tol: float = 1e-8) -> VerificationReport:
    """Звіт без винятків: pointwise-нев'язка, нев'язки Нехарі, енергія, оцінки ‖u⁺‖, знак F."""
    split = prob.split
    r = phi_gradient(prob, u).values
    residual = float(np.max(np.abs(r)))
    energy = phi(prob, u)
    plus, minus = project(split, u)
    norm_plus = equivalent_norm(split, plus)
    norm_minus = equivalent_norm(split, minus)
    try:
        nehari = nehari_residual(prob, u)
        scale = tol * (1.0 + equivalent_norm(split, u))
        in_manifold = nehari[0] <= scale and nehari[1] <= scale
    except DomainError:
        nehari = (float("inf"), float("inf"))
        in_manifold = False
    if c_hat is None:
        c_hat = energy
    slack = 1e-10 * (1.0 + norm_plus)
    bounds_ok = norm_plus + slack >= norm_minus and norm_plus + slack >= np.sqrt(2.0 * max(c_hat, 0.0))
    nonzero = u.values != 0
    F = prob.nl.F_of(u)[nonzero]
    half = 0.5 * prob.nl.f_of(u)[nonzero] * u.values[nonzero]
    # F = ½fu у межах округлення не є порушенням (f = u³ + u біля нуля)
    sign_ok = bool(np.all(F > 0) and np.all(F <= half + config.MONOTONE_MARGIN * np.abs(half))) if nonzero.any() else False
    passed = residual <= tol and in_manifold and energy > 0 and bool(bounds_ok) and sign_ok
    return VerificationReport(
        residual_pointwise=residual, residual_nehari=tuple(float(x) for x in nehari),
        energy=energy, energy_positive=energy > 0, norm_plus=norm_plus, norm_minus=norm_minus,
        c_hat=float(c_hat), bounds_ok=bool(bounds_ok), sign_audit=sign_ok,
        in_nehari=in_manifold, tol=tol, passed=bool(passed),
    )


# ----------------- ПОШУК З БАГАТЬОХ СТАРТІВ -----------------

def _run_start(prob: Problem, index: int, w0: VertexFunction, opts: SolveOptions) -> Dict:
    outcome = {"start": index, "status": "converged", "message": "", "point": None,
               "grad_norm": None, "iterations": 0, "flow_accepted": 0, "flow_rejected": 0}
    try:
        if opts.method == "flow":
            traj = pseudo_gradient_flow(prob, w0, opts)
            b = prob.split.plus_coords(traj.limit.w_hat)
            outcome["point"] = traj.limit
            outcome["grad_norm"] = float(np.linalg.norm(sphere_gradient_coords(prob, traj.limit, b / np.linalg.norm(b))))
            outcome["iterations"] = traj.accepted
            outcome["flow_accepted"] = traj.accepted
            outcome["flow_rejected"] = traj.rejected
        else:
            point, grad_norm, iterations, _ = _descend(prob, w0, opts)
            outcome.update(point=point, grad_norm=grad_norm, iterations=iterations)
    except NehariError as e:
        outcome["status"] = type(e).__name__
        outcome["message"] = str(e)
        log(f"⚠️ Старт {index}: {type(e).__name__}: {e}")
    return outcome


def multistart_search(prob: Problem, opts: SolveOptions = SolveOptions()) -> SolveResult:
    starts = start_directions(prob, opts)
    log(f"⏳ Пошук з {len(starts)} стартів (seed={opts.seed}, method={opts.method}, workers={opts.workers})")

    def run(item):
        return _run_start(prob, item[0], item[1], opts)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            outcomes = list(pool.map(run, enumerate(starts)))
    else:
        outcomes = [run(item) for item in enumerate(starts)]

    found = [o for o in outcomes if o["point"] is not None]
    diagnostics = {
        "starts": [{k: v for k, v in o.items() if k != "point"} for o in outcomes],
        "iterations": int(sum(o["iterations"] for o in outcomes)),
        "flow_events": {"accepted": int(sum(o["flow_accepted"] for o in outcomes)),
                        "rejected": int(sum(o["flow_rejected"] for o in outcomes))},
    }
    if not found:
        raise NonconvergenceError("жоден старт не зійшовся", trace=diagnostics["starts"])

    c_hat = min(o["point"].energy for o in found)
    verified = []
    for o in found:
        report = verify_solution(prob, o["point"].u, c_hat)
        if report.passed:
            verified.append(o)
        else:
            o["status"] = "unverified"
            diagnostics["starts"][o["start"]]["status"] = "unverified"
            log(f"⚠️ Старт {o['start']}: точка не пройшла перевірку (нев'язка {report.residual_pointwise:.2e})")
    if not verified:
        raise NonconvergenceError("жодна знайдена точка не пройшла verify_solution", trace=diagnostics["starts"])

    # один представник на клас орбіти: перший за номером старту; решта поглинаються зі свідком зсуву
    points: List[CriticalPoint] = []
    classes: List[List[int]] = []
    absorbed: List[Dict] = []
    for o in verified:
        u = o["point"].u
        for cls_id, cp in enumerate(points):
            comparison = orbit_distinct(prob, cp.point.u, u, opts.orbit_tol, opts.sign_orbit)
            if not comparison.distinct:
                classes[cls_id].append(o["start"])
                absorbed.append({"start": o["start"], "representative": cp.start_index, "orbit_class": cls_id,
                                 "shift": list(comparison.shift), "sign": comparison.sign,
                                 "distance": comparison.distance})
                break
        else:
            points.append(CriticalPoint(point=o["point"], grad_norm=o["grad_norm"], start_index=o["start"],
                                        iterations=o["iterations"], orbit_class=len(points)))
            classes.append([o["start"]])

    ground = min(points, key=lambda cp: cp.point.energy)
    if len(points) > 1:
        diagnostics["kappa"] = float(min(
            equivalent_norm(prob.split, a.point.u - b.point.u)
            for i, a in enumerate(points) for b in points[i + 1:]
        ))
    else:
        diagnostics["kappa"] = None
    diagnostics["absorbed"] = absorbed
    diagnostics["converged_starts"] = len(found)
    diagnostics["verified_starts"] = len(verified)
    log(f"✔️ Знайдено {len(points)} класів орбіт ({len(absorbed)} копій поглинуто), ĉ={ground.point.energy:.12g}")
    return SolveResult(critical_points=points, ground_state=ground, c_estimate=ground.point.energy,
                       orbit_classes=classes, diagnostics=diagnostics)


def minimax_audit(prob: Problem, c_estimate: float, n: int = 200, seed: int = 0,
                  tol: float = 1e-10, opts: SolveOptions = SolveOptions()) -> Dict:
    """c ≤ Φ(m̂(w)) для свіжих випадкових w ∈ S⁺: ĉ не перевищує жодного вибіркового значення."""
    rng = np.random.default_rng(seed)
    split = prob.split
    inner_opts = opts.inner(audit=False)
    energies = []
    skipped = []
    for i in range(n):
        b = rng.normal(size=split.dim_plus)
        try:
            energies.append(inner_maximize(prob, split.from_plus_coords(b / np.linalg.norm(b)), inner_opts).energy)
        except NehariError as e:
            skipped.append({"sample": i, "error": type(e).__name__, "message": str(e)})
            log(f"⚠️ Мінімакс-аудит: вибірку {i} пропущено: {type(e).__name__}: {e}")
    energies = np.array(energies)
    bound = c_estimate - tol * (1.0 + abs(c_estimate))
    violations = int(np.sum(energies < bound))
    return {
        "passed": violations == 0 and energies.size > 0,
        "samples": n,
        "evaluated": int(energies.size),
        "skipped": skipped,
        "min_energy": float(energies.min()) if energies.size else None,
        "violations": violations,
        "c_estimate": float(c_estimate),
    }


def translated_copies(prob: Problem, u: VertexFunction, shifts: Optional[Sequence[Sequence[int]]] = None):
    """Пари (k, u(· − kT)) для перевірки еквіваріантності."""
    for k in (shifts if shifts is not None else all_shifts(prob.torus)):
        yield tuple(k), translate(u, k)
