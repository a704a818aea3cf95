import numpy as np
import pytest

from errors import HypothesisViolation
from lattice import VertexFunction, build_torus, constant, norm_lp, norm_w12
from spectral import (
    assemble_operator,
    bloch_spectrum,
    check_gap,
    commensurate_thetas,
    eigendecompose,
    equivalent_inner,
    equivalent_norm,
    potential_cell,
    project,
    spectral_split,
)


def spectrum(torus, potential):
    return eigendecompose(assemble_operator(torus, potential))


@pytest.mark.parametrize("side", [4, 8, 64])
def test_free_laplacian_1d_matches_fourier(side):
    torus = build_torus(1, [side], 1)
    eig = spectrum(torus, constant(torus, 0.0))
    expected = np.sort(2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(side) / side))
    assert np.max(np.abs(eig.eigenvalues - expected)) <= 1e-10
    assert eig.reconstruction_error() < 1e-12


def test_free_laplacian_2d_inside_band():
    torus = build_torus(2, [6, 6], 1)
    lam = spectrum(torus, constant(torus, 0.0)).eigenvalues
    assert lam.min() >= -1e-10
    assert lam.max() <= 8.0 + 1e-10


def test_staggered_gap_instance(stagger):
    torus = build_torus(1, [16], 2)
    eig = spectrum(torus, stagger(torus))
    lam = eig.eigenvalues
    mags = np.abs(lam)
    assert np.all(mags >= 1.0 - 1e-8)
    assert np.all(mags <= np.sqrt(5.0) + 1e-8)
    report = check_gap(eig)
    assert report.passed
    assert report.dim_minus == 8 and report.dim_plus == 8
    assert report.lambda_minus_max == pytest.approx(-1.0, abs=1e-10)
    assert report.lambda_plus_min == pytest.approx(1.0, abs=1e-10)


def test_bloch_oracle_matches_torus(stagger):
    torus = build_torus(1, [16], 2)
    potential = stagger(torus)
    bands = bloch_spectrum(1, 2, potential_cell(torus, potential), commensurate_thetas(torus))
    torus_values = spectrum(torus, potential).eigenvalues
    assert np.allclose(bands.all_values(), torus_values, atol=1e-10)
    dense = bloch_spectrum(1, 2, potential_cell(torus, potential), 128)
    (low_min, low_max), (high_min, high_max) = dense.bands
    assert low_min == pytest.approx(-np.sqrt(5.0), abs=1e-8)
    assert low_max == pytest.approx(-1.0, abs=1e-8)
    assert high_min == pytest.approx(1.0, abs=1e-8)
    assert high_max == pytest.approx(np.sqrt(5.0), abs=1e-8)


def test_bloch_oracle_2d(stagger):
    torus = build_torus(2, [4, 6], 2)
    potential = stagger(torus, shift=-4.0)
    bands = bloch_spectrum(2, 2, potential_cell(torus, potential), commensurate_thetas(torus))
    assert np.allclose(bands.all_values(), spectrum(torus, potential).eigenvalues, atol=1e-10)


def test_projection_algebra_on_random_gap_instances(stagger, rng):
    for _ in range(20):
        side = int(rng.choice([8, 12, 16]))
        torus = build_torus(1, [side], 2)
        split = spectral_split(spectrum(torus, stagger(torus, amplitude=rng.uniform(0.5, 2.0))))
        p_plus, p_minus = split.p_plus, split.p_minus
        eye = np.eye(side)
        assert np.linalg.norm(p_plus + p_minus - eye) <= 1e-10
        assert np.linalg.norm(p_plus @ p_plus - p_plus) <= 1e-10
        assert np.linalg.norm(p_minus @ p_minus - p_minus) <= 1e-10
        assert np.linalg.norm(p_plus @ p_minus) <= 1e-10


def test_zero_eigenvalue_violates_gap():
    torus = build_torus(1, [8], 1)
    eig = spectrum(torus, constant(torus, -2.0))
    with pytest.raises(HypothesisViolation) as info:
        check_gap(eig)
    assert info.value.report is not None
    assert not info.value.report.passed
    assert info.value.report.offending
    assert info.value.exit_code == 2


def test_empty_positive_space_violates_gap():
    torus = build_torus(1, [8], 1)
    report = check_gap(spectrum(torus, constant(torus, -10.0)), strict=False)
    assert not report.passed
    assert report.dim_plus == 0


def test_definite_case_has_trivial_negative_space():
    torus = build_torus(1, [8], 1)
    split = spectral_split(spectrum(torus, constant(torus, 1.0)))
    assert split.dim_minus == 0
    assert split.eigenvalues.min() >= 1.0 - 1e-12
    assert split.report.to_dict()["pass"] is True


def test_non_periodic_potential_rejected():
    torus = build_torus(1, [8], 2)
    values = np.tile([1.0, -1.0], 4)
    values[5] = 3.0
    with pytest.raises(HypothesisViolation, match="2-періодичний"):
        assemble_operator(torus, VertexFunction(values, torus))


def test_operator_matrix_matches_stencil(stagger, rng):
    torus = build_torus(2, [4, 4], 2)
    op = assemble_operator(torus, stagger(torus, shift=-4.0))
    u = VertexFunction(rng.normal(size=16), torus)
    assert np.allclose(op.apply(u).values, op.apply_stencil(u).values, atol=1e-12)


def test_equivalent_norm_and_coordinates(staggered, rng):
    split = staggered.split
    torus = staggered.torus
    u = VertexFunction(rng.normal(size=torus.vertex_count), torus)
    plus, minus = project(split, u)
    matrix = staggered.operator.matrix
    expected = plus.values @ matrix @ plus.values - minus.values @ matrix @ minus.values
    assert equivalent_norm(split, u) ** 2 == pytest.approx(expected, rel=1e-10)
    assert equivalent_inner(split, plus, minus) == pytest.approx(0.0, abs=1e-10)
    b = split.plus_coords(u)
    assert np.linalg.norm(b) == pytest.approx(equivalent_norm(split, plus), rel=1e-12)
    assert np.allclose(split.from_plus_coords(b).values, plus.values, atol=1e-12)


def test_operator_is_definite_on_each_subspace(staggered, rng):
    split = staggered.split
    matrix = staggered.operator.matrix
    torus = staggered.torus
    for _ in range(500):
        u = VertexFunction(rng.normal(size=torus.vertex_count), torus)
        plus, minus = project(split, u)
        q_plus = plus.values @ matrix @ plus.values
        q_minus = minus.values @ matrix @ minus.values
        assert q_plus >= (split.beta_plus - 1e-10) * np.dot(plus.values, plus.values)
        assert q_minus <= -(split.beta - 1e-10) * np.dot(minus.values, minus.values)
        assert q_plus > 0 > q_minus


def test_equivalent_norm_against_w12(staggered, rng):
    split = staggered.split
    torus = staggered.torus
    low = min(split.beta, split.beta_plus)
    high = max(split.alpha, split.alpha_plus)
    assert low == pytest.approx(1.0, abs=1e-10)
    assert high == pytest.approx(np.sqrt(5.0), abs=1e-10)
    for _ in range(200):
        u = VertexFunction(rng.normal(size=torus.vertex_count), torus)
        squared = equivalent_norm(split, u) ** 2
        l2 = norm_lp(u, 2) ** 2
        w12 = norm_w12(u) ** 2
        assert low * l2 * (1 - 1e-10) <= squared <= high * l2 * (1 + 1e-10)
        assert low / (4 * torus.dim + 1) * w12 * (1 - 1e-10) <= squared <= high * w12 * (1 + 1e-10)


def test_bloch_free_laplacian_band():
    bands = bloch_spectrum(1, 1, [0.0], 64).bands
    assert len(bands) == 1
    assert bands[0][0] == pytest.approx(0.0, abs=1e-12)
    assert bands[0][1] == pytest.approx(4.0, abs=1e-12)


@pytest.mark.parametrize("c", [-1.5, 0.0, 2.0])
def test_bloch_constant_potential_dispersion(c):
    thetas = np.linspace(0.0, 2.0 * np.pi, 33).reshape(-1, 1)
    structure = bloch_spectrum(1, 1, [c], thetas)
    expected = 2.0 - 2.0 * np.cos(thetas[:, 0]) + c
    assert np.allclose(structure.eigenvalues[:, 0], expected, atol=1e-12)
