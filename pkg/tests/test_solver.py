import numpy as np
import pytest

from errors import ConfigError, DomainError, InnerMaximizationError, NonconvergenceError
from lattice import VertexFunction, build_torus, constant, delta, translate
from solver import (
    SolveOptions,
    _descend,
    minimax_audit,
    minimize_sphere,
    multistart_search,
    newton_polish,
    orbit_distinct,
    pseudo_gradient_flow,
    start_directions,
    translated_copies,
    verify_solution,
)
from spectral import equivalent_norm
from variational import check_sphere, phi, phi_gradient, unit_direction


@pytest.fixture
def breather(staggered):
    """Критична точка ступінчастої задачі, знайдена спуском від δ_0."""
    return minimize_sphere(staggered, unit_direction(staggered, delta(staggered.torus, (0,))))


def test_definite_constant_start_is_critical(definite):
    point = minimize_sphere(definite, unit_direction(definite, constant(definite.torus, 1.0)))
    assert point.energy == pytest.approx(2.0, abs=1e-12)
    report = verify_solution(definite, point.u)
    assert report.residual_pointwise <= 1e-8
    assert report.passed


def test_definite_delta_start_descends(definite):
    point = minimize_sphere(definite, unit_direction(definite, delta(definite.torus, (0,))))
    report = verify_solution(definite, point.u)
    assert report.passed
    assert 0 < point.energy < 2.25


def test_flow_agrees_with_descent(definite):
    w0 = unit_direction(definite, delta(definite.torus, (0,)))
    descent = minimize_sphere(definite, w0)
    traj = pseudo_gradient_flow(definite, w0)
    assert traj.converged
    assert traj.accepted == len(traj) - 1
    assert np.all(np.diff(traj.psi_values) < 0)
    assert np.all(np.diff(traj.times) > 0)
    assert np.allclose(traj.limit.u.values, descent.u.values, atol=1e-6)


def test_flow_from_critical_point_is_empty(definite):
    traj = pseudo_gradient_flow(definite, unit_direction(definite, constant(definite.torus, 1.0)))
    assert len(traj) == 0
    assert traj.converged
    assert traj.limit.energy == pytest.approx(2.0)


def test_breather_is_verified(staggered, breather):
    report = verify_solution(staggered, breather.u)
    assert report.passed
    assert report.residual_pointwise <= 1e-8
    assert report.norm_plus >= report.norm_minus
    assert report.norm_plus >= np.sqrt(2.0 * report.energy) - 1e-10


def test_orbit_distinct_translations_and_sign(staggered, breather):
    u = breather.u
    moved = orbit_distinct(staggered, u, translate(u, (3,)))
    assert not moved.distinct
    assert moved.distance < 1e-12
    assert moved.shift == (5,)
    flipped = orbit_distinct(staggered, u, -u)
    assert not flipped.distinct
    assert flipped.sign == -1
    assert orbit_distinct(staggered, u, -u, sign_orbit=False).distinct
    two_bump = u + translate(u, (4,))
    assert orbit_distinct(staggered, u, two_bump).distinct


def test_orbit_distinct_rejects_other_torus(staggered, breather):
    other = constant(build_torus(1, [8], 2), 1.0)
    with pytest.raises(DomainError):
        orbit_distinct(staggered, breather.u, other)


def test_verify_solution_reports_without_raising(definite):
    assert verify_solution(definite, constant(definite.torus, 1.0)).passed
    zero = verify_solution(definite, constant(definite.torus, 0.0))
    assert not zero.passed
    assert not zero.in_nehari
    assert not zero.sign_audit
    noise = np.random.default_rng(5).normal(scale=1e-3, size=8)
    perturbed = verify_solution(definite, VertexFunction(1.0 + noise, definite.torus))
    assert not perturbed.passed
    assert perturbed.residual_pointwise > 1e-8
    assert perturbed.to_dict()["pass"] is False


def test_newton_polish_recovers_solution(staggered, breather):
    noise = np.random.default_rng(9).normal(scale=1e-6, size=16)
    polished = newton_polish(staggered, breather.u + VertexFunction(noise, staggered.torus))
    assert np.max(np.abs(phi_gradient(staggered, polished).values)) <= 1e-11
    assert np.allclose(polished.values, breather.u.values, atol=1e-9)


def _verified_starts(result):
    return sorted(s["start"] for s in result.diagnostics["starts"] if s["status"] == "converged")


def test_multistart_staggered_invariants(staggered):
    opts = SolveOptions(n_starts=16, seed=7)
    result = multistart_search(staggered, opts)
    assert result.critical_points
    assert result.c_estimate == result.ground_state.point.energy
    members = sorted(i for cls in result.orbit_classes for i in cls)
    assert members == _verified_starts(result)
    assert len(result.orbit_classes) == len(result.critical_points)
    for cp in result.critical_points:
        report = verify_solution(staggered, cp.point.u, result.c_estimate)
        assert report.passed
        assert cp.point.energy >= result.c_estimate
        cls = result.orbit_classes[cp.orbit_class]
        assert cp.start_index == cls[0] == min(cls)
    assert result.diagnostics["verified_starts"] <= result.diagnostics["converged_starts"] <= 16
    assert len(result.diagnostics["starts"]) == 16
    assert minimax_audit(staggered, result.c_estimate, n=200, seed=1)["passed"]

    u = result.ground_state.point.u
    base_residual = np.max(np.abs(phi_gradient(staggered, u).values))
    base_energy = phi(staggered, u)
    for _, moved in translated_copies(staggered, u):
        assert np.max(np.abs(phi_gradient(staggered, moved).values)) <= base_residual + 1e-12
        assert phi(staggered, moved) == pytest.approx(base_energy, abs=1e-12 * (1 + base_energy))
    assert phi(staggered, -u) == pytest.approx(base_energy, abs=1e-12)
    assert np.allclose(phi_gradient(staggered, -u).values, -phi_gradient(staggered, u).values, atol=1e-12)


def test_multistart_keeps_one_point_per_orbit(staggered):
    opts = SolveOptions(n_starts=16, seed=7)
    result = multistart_search(staggered, opts)
    points = result.critical_points
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            assert orbit_distinct(staggered, a.point.u, b.point.u, opts.orbit_tol).distinct
    if len(points) > 1:
        assert result.diagnostics["kappa"] > opts.orbit_tol
    by_start = {cp.start_index: cp for cp in points}
    for entry in result.diagnostics["absorbed"]:
        cls = result.orbit_classes[entry["orbit_class"]]
        assert entry["start"] in cls[1:]
        assert entry["representative"] == cls[0]
        assert entry["start"] not in by_start
        rep = by_start[entry["representative"]].point.u
        assert entry["distance"] <= opts.orbit_tol * (1.0 + equivalent_norm(staggered.split, rep))
    assert len(result.diagnostics["absorbed"]) == len(_verified_starts(result)) - len(points)


def test_staggered_many_starts_find_several_orbits(staggered):
    opts = SolveOptions(n_starts=32, seed=7)
    result = multistart_search(staggered, opts)
    assert len(result.orbit_classes) >= 2
    absorbed = result.diagnostics["absorbed"]
    assert absorbed
    # свідок зсуву відтворює представника з незалежного спуску
    entry = absorbed[0]
    starts = start_directions(staggered, opts)
    copy = minimize_sphere(staggered, starts[entry["start"]], opts).u
    rep = next(cp for cp in result.critical_points if cp.start_index == entry["representative"]).point.u
    moved = translate(copy, tuple(entry["shift"])) * entry["sign"]
    assert equivalent_norm(staggered.split, rep - moved) <= opts.orbit_tol * (1.0 + equivalent_norm(staggered.split, rep))


def test_descent_energy_strictly_decreases(staggered):
    w0 = unit_direction(staggered, delta(staggered.torus, (0,)))
    _, grad_norm, iterations, trace = _descend(staggered, w0, SolveOptions())
    energies = [e for _, e, _ in trace]
    assert len(energies) > 1
    assert iterations == trace[-1][0]
    assert np.all(np.diff(energies) < 0)


def test_multistart_is_deterministic(staggered):
    opts = SolveOptions(n_starts=4, seed=3)
    first = multistart_search(staggered, opts)
    second = multistart_search(staggered, opts)
    assert first.c_estimate == second.c_estimate
    for a, b in zip(first.critical_points, second.critical_points):
        assert np.array_equal(a.point.u.values, b.point.u.values)


def test_workers_do_not_change_result(staggered):
    serial = multistart_search(staggered, SolveOptions(n_starts=4, seed=11))
    threaded = multistart_search(staggered, SolveOptions(n_starts=4, seed=11, workers=2))
    assert serial.c_estimate == threaded.c_estimate
    assert serial.orbit_classes == threaded.orbit_classes
    assert [cp.start_index for cp in serial.critical_points] == [cp.start_index for cp in threaded.critical_points]


def test_single_start_gives_single_class(staggered):
    result = multistart_search(staggered, SolveOptions(n_starts=1, seed=2))
    assert len(result.critical_points) == 1
    assert result.orbit_classes == [[0]]
    assert result.diagnostics["kappa"] is None


def test_start_directions_lie_on_sphere(staggered):
    opts = SolveOptions(n_starts=9, seed=4)
    starts = start_directions(staggered, opts)
    assert len(starts) == 9
    for w in starts:
        check_sphere(staggered, w)
    again = start_directions(staggered, opts)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(starts, again))


def test_minimax_audit_flags_overestimate(staggered, breather):
    audit = minimax_audit(staggered, 10.0 * breather.energy, n=20, seed=0)
    assert not audit["passed"]
    assert audit["violations"] > 0
    assert audit["min_energy"] < 10.0 * breather.energy


@pytest.mark.parametrize("field, value", [
    ("tol_grad", 0.0),
    ("max_iters", 0),
    ("n_starts", 0),
    ("workers", 0),
    ("flow_step", -1.0),
    ("method", "newton"),
])
def test_invalid_options(field, value):
    with pytest.raises(ConfigError):
        SolveOptions(**{field: value})


def test_iteration_budget_exhausted(staggered):
    w0 = unit_direction(staggered, delta(staggered.torus, (0,)))
    with pytest.raises(NonconvergenceError) as err:
        minimize_sphere(staggered, w0, SolveOptions(max_iters=1, polish=False))
    assert err.value.best is not None
    with pytest.raises(NonconvergenceError):
        multistart_search(staggered, SolveOptions(max_iters=1, n_starts=2, polish=False))


def test_minimax_audit_skips_failed_samples(staggered, monkeypatch):
    import solver

    real = solver.inner_maximize
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] % 3 == 0:
            raise InnerMaximizationError("bracket not found")
        return real(*args, **kwargs)

    monkeypatch.setattr(solver, "inner_maximize", flaky)
    audit = minimax_audit(staggered, 0.0, n=30, seed=2)
    assert len(audit["skipped"]) == 10
    assert audit["skipped"][0] == {"sample": 2, "error": "InnerMaximizationError", "message": "bracket not found"}
    assert audit["evaluated"] == 20
    assert audit["samples"] == 30
    assert audit["min_energy"] > 0
    assert audit["violations"] == 0
    assert audit["passed"]
