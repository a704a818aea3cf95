#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Нелінійність f(x,u), її первісна F(x,u) = ∫₀ᵘ f(x,s) ds та чисельний аудит
гіпотез про f на сітках.

Кожен аудит повертає AuditReport з прапорцем, запасом, свідками порушення та
«сертифікатом» (параметри сітки), щоб провал можна було відтворити.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate

import config
from errors import ConfigError, HypothesisViolation
from lattice import LatticeTorus, VertexFunction
from utils import get_logger

log = get_logger("nonlinearity")

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """
    f, F, df приймають масиви індексів вершин x і значень u однакової форми.
    homogeneous — F(x, t·u) = t^p F(x, u); тоді на E⁻ = {0} масштаб Нехарі
    має замкнену форму.
    """
    torus: LatticeTorus
    f: Evaluator
    F: Evaluator
    p: float
    a: float
    name: str = "custom"
    odd: bool = False
    homogeneous: bool = False
    df: Optional[Evaluator] = None
    params: Dict = field(default_factory=dict)

    def _x(self) -> np.ndarray:
        return np.arange(self.torus.vertex_count)

    def f_of(self, u: VertexFunction) -> np.ndarray:
        return np.asarray(self.f(self._x(), u.values), dtype=np.float64)

    def F_of(self, u: VertexFunction) -> np.ndarray:
        return np.asarray(self.F(self._x(), u.values), dtype=np.float64)

    def derivative(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.df is not None:
            return np.asarray(self.df(x, u), dtype=np.float64)
        h = 1e-6 * (1.0 + np.abs(u))
        return (self.f(x, u + h) - self.f(x, u - h)) / (2.0 * h)

    def derivative_of(self, u: VertexFunction) -> np.ndarray:
        return self.derivative(self._x(), u.values)


def _cell_weights(torus: LatticeTorus, weight: VertexFunction) -> np.ndarray:
    if weight.torus != torus:
        raise ConfigError("вага задана на іншому торі")
    values = weight.values
    if np.any(values <= 0):
        raise ConfigError(f"вага має бути додатною, мінімум {values.min()}")
    cell = torus.cell_index()
    reference = values[torus.cell_vertices()]
    bad = np.flatnonzero(values != reference[cell])
    if bad.size:
        raise HypothesisViolation(
            f"вага не {torus.period}-періодична: вершина {torus.coords_of(bad[0])}"
        )
    return values


def power_nonlinearity(p: float, weight: VertexFunction) -> Nonlinearity:
    """f(x,u) = weight(x)|u|^{p−2}u, F = weight|u|^p/p."""
    if p <= 2:
        raise ConfigError(f"умова росту вимагає p > 2, отримано p={p}")
    torus = weight.torus
    w = _cell_weights(torus, weight)
    p = float(p)

    def f(x, u):
        return w[x] * np.abs(u) ** (p - 2.0) * u

    def F(x, u):
        return w[x] * np.abs(u) ** p / p

    def df(x, u):
        return (p - 1.0) * w[x] * np.abs(u) ** (p - 2.0)

    return Nonlinearity(
        torus=torus, f=f, F=F, df=df, p=p, a=float(w.max()), name="power",
        odd=True, homogeneous=True, params={"p": p},
    )


def logarithmic_nonlinearity(weight: VertexFunction) -> Nonlinearity:
    """
    f(x,u) = weight(x)·u·log(1+u²). Непарна, задовольняє умову росту з p=4, a=max weight,
    бо log(1+u²) ≤ u².
    """
    torus = weight.torus
    w = _cell_weights(torus, weight)

    def f(x, u):
        return w[x] * u * np.log1p(u * u)

    def F(x, u):
        u2 = u * u
        with np.errstate(over="ignore", invalid="ignore"):
            exact = 0.5 * ((1.0 + u2) * np.log1p(u2) - u2)
        # ряд u⁴/4 − u⁶/12 + u⁸/24 − u¹⁰/40 біля нуля, де формула вище втрачає точність
        series = u2 * u2 * (0.25 - u2 / 12.0 + u2 * u2 / 24.0 - u2 ** 3 / 40.0)
        return w[x] * np.where(np.abs(u) < 1e-2, series, exact)

    def df(x, u):
        u2 = u * u
        return w[x] * (np.log1p(u2) + 2.0 * u2 / (1.0 + u2))

    return Nonlinearity(
        torus=torus, f=f, F=F, df=df, p=4.0, a=float(w.max()), name="logarithmic",
        odd=True, homogeneous=False,
    )


def table_nonlinearity(
    u_nodes: Sequence[float],
    f_nodes: Sequence[float],
    weight: VertexFunction,
    p: float,
    a: Optional[float] = None,
) -> Nonlinearity:
    """
    Табульована непарна нелінійність: f(x,u) = weight(x)·φ(u), φ кусково-лінійна
    на вузлах 0 = u_0 < … < u_m, φ(−u) = −φ(u), за u_m — продовження φ(u_m)(u/u_m)^{p−1}.
    F обчислюється точно (інтеграл кусково-лінійної функції).
    """
    un = np.asarray(u_nodes, dtype=np.float64)
    fn = np.asarray(f_nodes, dtype=np.float64)
    if un.ndim != 1 or un.shape != fn.shape or un.size < 2:
        raise ConfigError("таблиця нелінійності: u і f мають бути однакової довжини ≥ 2")
    if un[0] != 0.0 or fn[0] != 0.0:
        raise ConfigError("таблиця нелінійності має починатися з (0, 0)")
    if np.any(np.diff(un) <= 0):
        raise ConfigError("вузли u таблиці мають строго зростати")
    if p <= 2:
        raise ConfigError(f"умова росту вимагає p > 2, отримано p={p}")
    torus = weight.torus
    w = _cell_weights(torus, weight)
    u_end, f_end = un[-1], fn[-1]
    slopes = np.diff(fn) / np.diff(un)
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (fn[1:] + fn[:-1]) * np.diff(un))])

    def phi(t):
        inside = np.interp(t, un, fn)
        outside = f_end * (t / u_end) ** (p - 1.0)
        return np.where(t <= u_end, inside, outside)

    def big_phi(t):
        seg = np.clip(np.searchsorted(un, t, side="right") - 1, 0, un.size - 2)
        dt = np.minimum(t, u_end) - un[seg]
        inside = cumulative[seg] + fn[seg] * dt + 0.5 * slopes[seg] * dt * dt
        outside = cumulative[-1] + f_end * u_end / p * ((t / u_end) ** p - 1.0)
        return np.where(t <= u_end, inside, outside)

    def f(x, u):
        return w[x] * np.sign(u) * phi(np.abs(u))

    def F(x, u):
        return w[x] * big_phi(np.abs(u))

    if a is None:
        # |φ(u)| ≤ a(|u| + |u|^{p−1}) на вузлах і на степеневому продовженні
        nodes = un[1:]
        on_nodes = np.max(np.abs(fn[1:]) / (nodes + nodes ** (p - 1.0)))
        a = float(max(on_nodes, abs(f_end) / u_end ** (p - 1.0)) * w.max())
    return Nonlinearity(
        torus=torus, f=f, F=F, p=float(p), a=float(a), name="table", odd=True,
        params={"u": un.tolist(), "f": fn.tolist()},
    )


def custom_nonlinearity(
    torus: LatticeTorus,
    f: Evaluator,
    F: Optional[Evaluator] = None,
    *,
    p: float,
    a: float,
    odd: bool = False,
    name: str = "custom",
    df: Optional[Evaluator] = None,
) -> Nonlinearity:
    """
    Довільна f(x,u). Якщо F не задана, вона синтезується квадратурою з кешем
    за (вершина комірки, u).
    """
    if F is None:
        cell = torus.cell_index()
        representatives = torus.cell_vertices()

        @lru_cache(maxsize=200_000)
        def primitive(cell_id: int, value: float) -> float:
            x0 = np.array([representatives[cell_id]])
            integrand = lambda s: float(f(x0, np.array([s]))[0])
            result, _ = integrate.quad(integrand, 0.0, value, epsabs=1e-13, epsrel=1e-12, limit=200)
            return result

        def F(x, u):
            x = np.asarray(x)
            u = np.asarray(u, dtype=np.float64)
            flat_x, flat_u = np.broadcast_arrays(x, u)
            out = [primitive(int(cell[xi]), float(ui)) for xi, ui in zip(flat_x.reshape(-1), flat_u.reshape(-1))]
            return np.array(out, dtype=np.float64).reshape(flat_u.shape)

    return Nonlinearity(torus=torus, f=f, F=F, df=df, p=float(p), a=float(a), name=name, odd=odd)


# ----------------- АУДИТ ГІПОТЕЗ -----------------

@dataclass
class AuditReport:
    hypothesis: str
    passed: bool
    margin: float
    witnesses: List[Dict] = field(default_factory=list)
    certificate: Dict = field(default_factory=dict)
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "pass": self.passed,
            "margin": self.margin,
            "witnesses": self.witnesses,
            "certificate": self.certificate,
            "details": self.details,
        }


@dataclass(frozen=True)
class EpsilonBound:
    epsilon: float
    c_epsilon: float
    certified: bool
    worst_u: float

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "c_epsilon": self.c_epsilon,
                "certified": self.certified, "worst_u": self.worst_u}


def default_u_grid(u_min: float = config.AUDIT_U_MIN, u_max: float = config.AUDIT_U_MAX,
                   points: int = config.AUDIT_POINTS) -> np.ndarray:
    positive = np.geomspace(u_min, u_max, points)
    return np.concatenate([-positive[::-1], positive])


def _mesh(nl: Nonlinearity, u_grid: np.ndarray):
    xs = nl.torus.cell_vertices()
    X, U = np.meshgrid(xs, np.asarray(u_grid, dtype=np.float64), indexing="ij")
    return X, U


def _witness(nl: Nonlinearity, x: int, u: float, value: float) -> Dict:
    return {"x": list(nl.torus.coords_of(int(x))), "u": float(u), "value": float(value)}


def _grid_certificate(u_grid: np.ndarray, **extra) -> Dict:
    u_grid = np.asarray(u_grid)
    cert = {"points": int(u_grid.size), "u_min_abs": float(np.min(np.abs(u_grid))),
            "u_max_abs": float(np.max(np.abs(u_grid)))}
    cert.update(extra)
    return cert


def verify_growth(nl: Nonlinearity, u_grid: Optional[np.ndarray] = None, tol: float = 1e-12) -> AuditReport:
    """Ріст: |f(x,u)| ≤ a(|u| + |u|^{p−1})."""
    u_grid = default_u_grid() if u_grid is None else np.asarray(u_grid, dtype=np.float64)
    X, U = _mesh(nl, u_grid)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.abs(nl.f(X, U))
        bound = nl.a * (np.abs(U) + np.abs(U) ** (nl.p - 1.0))
        relative = np.where(np.isfinite(values), (bound - values) / bound, -np.inf)
    relative = np.nan_to_num(relative, nan=-np.inf)
    bad = relative < -tol
    order = np.argsort(relative, axis=None)[:5]
    witnesses = [_witness(nl, X.flat[i], U.flat[i], values.flat[i]) for i in order if bad.flat[i]]
    report = AuditReport(
        hypothesis="growth", passed=not bad.any(), margin=float(relative.min()),
        witnesses=witnesses, certificate=_grid_certificate(u_grid, a=nl.a, p=nl.p, tol=tol),
    )
    log(f"{'✔️' if report.passed else '❌'} ріст: запас {report.margin:.3e}")
    return report


def verify_small_o(nl: Nonlinearity, tol: float = 1e-6, levels: int = 60) -> AuditReport:
    """o(u) біля нуля: sup_x |f(x,u)/u| → 0 на сітці u = ±2^{−j}."""
    xs = nl.torus.cell_vertices()
    us = 2.0 ** -np.arange(1, levels + 1)
    ratios = []
    argmax = []
    for u in us:
        both = np.concatenate([np.abs(nl.f(xs, np.full(xs.shape, u))),
                               np.abs(nl.f(xs, np.full(xs.shape, -u)))]) / u
        ratios.append(float(both.max()))
        argmax.append(int(xs[int(both.argmax()) % xs.size]))
    ratios = np.array(ratios)
    tail = ratios[3 * levels // 4:]
    decaying = bool(np.all(np.diff(tail) <= 1e-15 * np.maximum(tail[:-1], 1.0)))
    passed = bool(decaying and ratios[-1] <= tol)
    witnesses = []
    if not passed:
        j = int(np.flatnonzero(ratios > tol)[-1]) if np.any(ratios > tol) else levels - 1
        witnesses.append(_witness(nl, argmax[j], us[j], ratios[j]))
    report = AuditReport(
        hypothesis="small_o", passed=passed, margin=float(tol - ratios[-1]), witnesses=witnesses,
        certificate={"levels": levels, "u_min": float(us[-1]), "tol": tol},
        details={"final_ratio": float(ratios[-1]), "tail_decreasing": decaying},
    )
    log(f"{'✔️' if passed else '❌'} o(u) біля нуля: sup|f/u| = {ratios[-1]:.3e}")
    return report


def verify_superquadratic(nl: Nonlinearity, U_max: float = config.AUDIT_U_MAX,
                          growth_factor: float = 2.0) -> AuditReport:
    """
    Надквадратичність: F(x,u)/u² → ∞. На подвійній сітці |u| = 1, 2, 4, …, U_max відношення
    (найгірше по x і знаку) має строго зростати на верхній половині сітки і
    перевищити growth_factor·(значення при |u|=1).
    """
    xs = nl.torus.cell_vertices()
    magnitudes = 2.0 ** np.arange(0, int(np.floor(np.log2(U_max))) + 1)
    if magnitudes[-1] < U_max:
        magnitudes = np.append(magnitudes, U_max)
    q = []
    for m in magnitudes:
        values = np.concatenate([nl.F(xs, np.full(xs.shape, m)), nl.F(xs, np.full(xs.shape, -m))]) / (m * m)
        q.append(float(values.min()))
    q = np.array(q)
    upper = q[q.size // 2:]
    increasing = bool(np.all(np.diff(upper) > 0))
    grown = bool(q[-1] >= growth_factor * q[0] and q[-1] > q[0])
    witnesses = []
    if not increasing:
        i = int(np.flatnonzero(np.diff(upper) <= 0)[0]) + q.size // 2
        witnesses.append({"u": float(magnitudes[i + 1]), "value": float(q[i + 1]), "previous": float(q[i])})
    report = AuditReport(
        hypothesis="superquadratic", passed=increasing and grown, margin=float(q[-1] - growth_factor * q[0]),
        witnesses=witnesses,
        certificate={"U_max": float(U_max), "growth_factor": growth_factor, "points": int(magnitudes.size)},
        details={"ratio_at_1": float(q[0]), "ratio_at_U_max": float(q[-1]), "plateau": not increasing},
    )
    log(f"{'✔️' if report.passed else '❌'} надквадратичність: F/u² при U_max = {q[-1]:.3e}")
    return report


def verify_monotone(nl: Nonlinearity, u_grid: Optional[np.ndarray] = None,
                    margin: float = config.MONOTONE_MARGIN) -> AuditReport:
    """
    Монотонність: u ↦ f(x,u)/|u| строго зростає на (−∞,0) і на (0,∞).
    Разом з o(u) біля нуля це дає знак f(x,u)/|u| = знак u, що теж перевіряється.

    Кожна половина сітки проходиться від нуля назовні. Приріст розрізнений, якщо
    він > margin·max(|g_i|, |g_{i+1}|). Нерозрізнені кроки допускаються лише на
    початковому відрізку біля нуля, де g ще не відійшла від своєї границі
    (f = u³ + u: g = 1 + u²); далі кожен крок має бути розрізненим зростанням.
    """
    u_grid = default_u_grid() if u_grid is None else np.asarray(u_grid, dtype=np.float64)
    u_grid = np.sort(u_grid[u_grid != 0])
    witnesses = []
    worst = np.inf
    sign_ok = True
    for x in nl.torus.cell_vertices():
        for orientation, half in ((-1.0, u_grid[u_grid < 0][::-1]), (1.0, u_grid[u_grid > 0])):
            if half.size < 2:
                continue
            g = nl.f(np.full(half.shape, x), half) / np.abs(half)
            # назовні від нуля h = ±g має строго зростати
            h = orientation * g
            scale = np.maximum(np.abs(h[1:]), np.abs(h[:-1]))
            step = np.diff(h)
            resolved = step > margin * scale
            first = int(np.argmax(resolved)) if resolved.any() else step.size
            bad = step < -margin * scale
            bad[first:] |= ~resolved[first:]
            if not resolved.any():
                bad[-1] = True
            rel = step / np.where(scale > 0, scale, 1.0)
            worst = min(worst, float(rel[first:].min()) if first < step.size else float(rel.min()))
            for i in np.flatnonzero(bad)[:3]:
                witnesses.append({"x": list(nl.torus.coords_of(int(x))), "u1": float(half[i]),
                                  "u2": float(half[i + 1]), "g1": float(g[i]), "g2": float(g[i + 1])})
            wrong_sign = np.flatnonzero(np.sign(g) != np.sign(half))
            if wrong_sign.size:
                sign_ok = False
                i = int(wrong_sign[0])
                witnesses.append(_witness(nl, x, half[i], g[i]))
    passed = not witnesses
    report = AuditReport(
        hypothesis="monotone", passed=passed, margin=worst, witnesses=witnesses[:10],
        certificate=_grid_certificate(u_grid, margin=margin), details={"sign_consistent": sign_ok},
    )
    log(f"{'✔️' if passed else '❌'} монотонність f/|u|: {len(witnesses)} свідків")
    return report


def verify_sign_condition(nl: Nonlinearity, u_grid: Optional[np.ndarray] = None,
                          margin: float = config.MONOTONE_MARGIN) -> AuditReport:
    """
    0 < F(x,u) < ½ f(x,u)u для u ≠ 0.

    Верхня нерівність розрізнена, якщо ½fu − F > margin·max(|F|, |½fu|). Як і в
    verify_monotone, нерозрізнені точки допускаються лише на початковому відрізку
    біля нуля (f = u³ + u: різниця u⁴/4 тоне в u²/2); далі кожна точка має бути
    розрізненою. F ≤ 0 або F > ½fu понад margin — порушення будь-де.
    """
    u_grid = default_u_grid() if u_grid is None else np.asarray(u_grid, dtype=np.float64)
    u_grid = np.sort(u_grid[u_grid != 0])
    witnesses = []
    unresolved = 0
    max_ratio = -np.inf
    for x in nl.torus.cell_vertices():
        for half_grid in (u_grid[u_grid < 0][::-1], u_grid[u_grid > 0]):
            if half_grid.size == 0:
                continue
            xs = np.full(half_grid.shape, x)
            F = nl.F(xs, half_grid)
            half = 0.5 * nl.f(xs, half_grid) * half_grid
            scale = np.maximum(np.abs(F), np.abs(half))
            gap = half - F
            resolved = gap > margin * scale
            first = int(np.argmax(resolved)) if resolved.any() else gap.size
            bad = (F <= 0) | (gap < -margin * scale)
            bad[first:] |= ~resolved[first:]
            if not resolved.any():
                bad[-1] = True
            unresolved += first
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(half > 0, F / half, np.inf)
            max_ratio = max(max_ratio, float(ratio[first:].max()) if first < gap.size else float(ratio.max()))
            for i in np.flatnonzero(bad)[:3]:
                witnesses.append(_witness(nl, x, half_grid[i], F[i]))
    ratio_out = float(max_ratio) if max_ratio > -np.inf else None
    report = AuditReport(
        hypothesis="sign_condition", passed=not witnesses,
        margin=float(1.0 - ratio_out) if ratio_out is not None else 0.0,
        witnesses=witnesses[:10], certificate=_grid_certificate(u_grid, margin=margin),
        details={"max_F_over_half_fu": ratio_out, "unresolved_near_zero": unresolved},
    )
    log(f"{'✔️' if report.passed else '❌'} 0 < F < ½fu: max F/(½fu) = {report.details['max_F_over_half_fu']}")
    return report


def verify_antiderivative(nl: Nonlinearity, samples: Optional[Sequence[float]] = None,
                          tol: float = 1e-8) -> AuditReport:
    """|F(x,u) − ∫₀ᵘ f(x,s) ds| ≤ tol·max(1,|F|) з адаптивною квадратурою."""
    if samples is None:
        samples = (-7.5, -2.0, -0.3, -1e-3, 1e-3, 0.4, 1.0, 3.0, 12.0)
    worst = 0.0
    witnesses = []
    for x in nl.torus.cell_vertices():
        xa = np.array([x])
        for u in samples:
            exact, _ = integrate.quad(lambda s: float(nl.f(xa, np.array([s]))[0]), 0.0, u,
                                      epsabs=1e-13, epsrel=1e-12, limit=200)
            value = float(nl.F(xa, np.array([u]))[0])
            err = abs(value - exact) / max(1.0, abs(value))
            worst = max(worst, err)
            if err > tol:
                witnesses.append(_witness(nl, x, u, value - exact))
    report = AuditReport(
        hypothesis="antiderivative", passed=not witnesses, margin=float(tol - worst),
        witnesses=witnesses[:5], certificate={"samples": list(samples), "tol": tol},
        details={"max_relative_error": worst},
    )
    log(f"{'✔️' if report.passed else '❌'} F = ∫f: похибка {worst:.2e}")
    return report


def verify_periodicity(nl: Nonlinearity, samples: Sequence[float] = (-2.0, -0.5, 0.25, 1.5)) -> AuditReport:
    """f(x + T e_i, u) = f(x, u) точно: кожна вершина порівнюється з представником у комірці."""
    torus = nl.torus
    x = np.arange(torus.vertex_count)
    rep = torus.cell_vertices()[torus.cell_index()]
    witnesses = []
    for u in samples:
        U = np.full(x.shape, u)
        diff = nl.f(x, U) - nl.f(rep, U)
        for i in np.flatnonzero(diff != 0)[:3]:
            witnesses.append(_witness(nl, i, u, diff[i]))
    return AuditReport(
        hypothesis="periodicity", passed=not witnesses, margin=0.0, witnesses=witnesses,
        certificate={"samples": list(samples), "period": torus.period},
    )


def epsilon_bound(nl: Nonlinearity, epsilon: float, u_grid: Optional[np.ndarray] = None) -> EpsilonBound:
    """Найменша на сітці C_ε з |f(x,u)| ≤ ε|u| + C_ε|u|^{p−1}."""
    if epsilon <= 0:
        raise ConfigError(f"ε має бути додатним, отримано {epsilon}")
    u_grid = default_u_grid() if u_grid is None else np.asarray(u_grid, dtype=np.float64)
    u_grid = u_grid[u_grid != 0]
    X, U = _mesh(nl, u_grid)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.abs(nl.f(X, U))
        excess = np.maximum(values - epsilon * np.abs(U), 0.0) / np.abs(U) ** (nl.p - 1.0)
    if not np.all(np.isfinite(excess)):
        raise HypothesisViolation(f"необмежений ріст f на сітці (ε={epsilon})")
    i = int(np.argmax(excess))
    c_eps = float(excess.flat[i])
    certified = bool(np.all(values <= (epsilon * np.abs(U) + c_eps * np.abs(U) ** (nl.p - 1.0)) * (1 + 1e-12)))
    return EpsilonBound(epsilon=float(epsilon), c_epsilon=c_eps, certified=certified, worst_u=float(U.flat[i]))


def audit_all(nl: Nonlinearity, epsilons: Sequence[float] = config.EPSILON_TABLE) -> Dict:
    log(f"⏳ Аудит гіпотез для нелінійності '{nl.name}' (p={nl.p}, a={nl.a})")
    bundle = {
        "growth": verify_growth(nl).to_dict(),
        "small_o": verify_small_o(nl).to_dict(),
        "superquadratic": verify_superquadratic(nl).to_dict(),
        "monotone": verify_monotone(nl).to_dict(),
        "sign_condition": verify_sign_condition(nl).to_dict(),
        "antiderivative": verify_antiderivative(nl).to_dict(),
        "periodicity": verify_periodicity(nl).to_dict(),
    }
    table = []
    for eps in epsilons:
        try:
            table.append(epsilon_bound(nl, eps).to_dict())
        except HypothesisViolation as e:
            table.append({"epsilon": eps, "c_epsilon": None, "certified": False, "error": str(e)})
    bundle["epsilon_table"] = table
    return bundle
