import numpy as np
import pytest

from errors import ConfigError, DomainError
from lattice import (
    VertexFunction,
    all_shifts,
    build_torus,
    constant,
    delta,
    gradient_form,
    gradient_length,
    inner_w12,
    laplacian_apply,
    laplacian_matrix,
    norm_lp,
    norm_w12,
    translate,
)


@pytest.mark.parametrize("dim, sides, period", [
    (0, [], 1),
    (1, [8], 0),
    (2, [8], 2),
    (1, [2], 1),
    (1, [9], 2),
])
def test_build_torus_rejects_bad_geometry(dim, sides, period):
    with pytest.raises(ConfigError):
        build_torus(dim, sides, period)


def test_torus_basic_counts():
    torus = build_torus(2, [6, 4], 2)
    assert torus.vertex_count == 24
    assert torus.degree == 4
    assert torus.cells == (3, 2)
    assert len(list(all_shifts(torus))) == 6
    for i in range(torus.vertex_count):
        assert torus.index_of(torus.coords_of(i)) == i
    assert torus.index_of((-1, 4)) == torus.index_of((5, 0))


def test_vertex_function_validation():
    torus = build_torus(1, [8], 1)
    with pytest.raises(DomainError):
        VertexFunction(np.ones(7), torus)
    with pytest.raises(DomainError):
        VertexFunction(np.array([np.nan] + [0.0] * 7), torus)
    u = constant(torus, 2.0)
    with pytest.raises(ValueError):
        u.values[0] = 1.0
    other = constant(build_torus(1, [9], 1), 1.0)
    with pytest.raises(DomainError):
        u + other


def test_laplacian_of_delta():
    torus = build_torus(1, [8], 1)
    lap = laplacian_apply(delta(torus, (0,))).values
    expected = np.zeros(8)
    expected[[0, 1, 7]] = [-2.0, 1.0, 1.0]
    assert np.array_equal(lap, expected)


def test_laplacian_matrix_matches_stencil(rng):
    torus = build_torus(2, [4, 6], 2)
    u = VertexFunction(rng.normal(size=torus.vertex_count), torus)
    matrix = laplacian_matrix(torus)
    assert np.allclose(matrix, matrix.T)
    assert np.allclose(matrix @ u.values, laplacian_apply(u).values, atol=1e-12)
    assert np.allclose(laplacian_apply(constant(torus, 3.0)).values, 0.0)


def test_green_identity(rng):
    torus = build_torus(2, [4, 4], 1)
    u = VertexFunction(rng.normal(size=16), torus)
    v = VertexFunction(rng.normal(size=16), torus)
    lhs = np.sum(gradient_form(u, v).values)
    rhs = -np.dot(laplacian_apply(u).values, v.values)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_gradient_length_of_delta():
    torus = build_torus(1, [8], 1)
    length = gradient_length(delta(torus, (0,))).values
    assert length[0] == pytest.approx(1.0)
    assert length[1] == pytest.approx(np.sqrt(0.5))
    assert length[4] == 0.0


def test_norms():
    torus = build_torus(1, [8], 1)
    one = constant(torus, 1.0)
    assert norm_lp(one, 2) == pytest.approx(np.sqrt(8.0))
    assert norm_lp(one * -3.0, np.inf) == 3.0
    with pytest.raises(DomainError):
        norm_lp(one, 0.5)
    d = delta(torus, (3,))
    assert inner_w12(d, d) == pytest.approx(3.0)
    assert norm_w12(d) == pytest.approx(np.sqrt(3.0))


def test_translate_moves_by_period_multiples():
    torus = build_torus(1, [8], 2)
    d = delta(torus, (1,))
    moved = translate(d, (1,))
    assert moved.values[3] == 1.0
    assert np.array_equal(translate(d, (4,)).values, d.values)
    assert np.array_equal(translate(d, (-1,)).values, delta(torus, (7,)).values)
    with pytest.raises(DomainError):
        translate(d, (1, 1))


def test_translate_2d(rng):
    torus = build_torus(2, [6, 6], 3)
    u = VertexFunction(rng.normal(size=36), torus)
    back = translate(translate(u, (1, 1)), (-1, -1))
    assert np.array_equal(back.values, u.values)
    assert translate(u, (1, 0)).grid()[3, 0] == u.grid()[0, 0]


@pytest.mark.parametrize("dim, sides, period", [(1, [12], 2), (2, [4, 6], 2), (3, [4, 4, 4], 1)])
def test_w12_norm_is_sandwiched_by_l2(rng, dim, sides, period):
    torus = build_torus(dim, sides, period)
    for _ in range(1000):
        u = VertexFunction(rng.normal(size=torus.vertex_count), torus)
        ratio = norm_w12(u) ** 2 / norm_lp(u, 2) ** 2
        assert 1.0 - 1e-12 <= ratio <= 4 * dim + 1 + 1e-12


def test_lp_norms_decrease_in_p(rng):
    torus = build_torus(2, [6, 4], 2)
    exponents = [2.0, 2.5, 3.0, 4.0, 7.0, np.inf]
    for _ in range(200):
        u = VertexFunction(rng.standard_cauchy(size=torus.vertex_count), torus)
        norms = [norm_lp(u, p) for p in exponents]
        assert all(q <= p * (1 + 1e-12) for p, q in zip(norms, norms[1:]))


def test_gradient_form_is_symmetric_and_nonnegative(rng):
    torus = build_torus(2, [6, 6], 3)
    for _ in range(100):
        u = VertexFunction(rng.normal(size=36), torus)
        v = VertexFunction(rng.normal(size=36), torus)
        assert np.all(gradient_form(u, u).values >= 0.0)
        assert np.allclose(gradient_form(u, v).values, gradient_form(v, u).values, rtol=0, atol=1e-14)


def test_translation_commutes_with_laplacian_and_keeps_norms(rng):
    torus = build_torus(2, [6, 4], 2)
    u = VertexFunction(rng.normal(size=torus.vertex_count), torus)
    for k in all_shifts(torus):
        moved = translate(u, k)
        assert np.array_equal(laplacian_apply(moved).values, translate(laplacian_apply(u), k).values)
        for p in (2, 3, np.inf):
            assert norm_lp(moved, p) == pytest.approx(norm_lp(u, p), rel=1e-14)
        assert norm_w12(moved) == pytest.approx(norm_w12(u), rel=1e-14)
