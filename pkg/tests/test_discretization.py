import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import gamma

from cubicwave import ConfigError, ResolutionWarning
from cubicwave.discretization import (FieldPair, GridSpec, HarmonicBasis, ScalarField, ball_volume,
                                      cartesian_derivative, make_grid, multi_indices, partial, read_snapshot,
                                      sobolev_seminorm, sphere_area, write_snapshot)
from cubicwave.geometry import axis_rapidity, static_profile, static_profile_gradient

B5 = 8 * np.pi**2 / 15
S4 = 8 * np.pi**2 / 3


@pytest.fixture(scope="module")
def grid():
    return make_grid(d=5, n_r=24, n_theta=8)


def test_measure_constants():
    for d in (3, 5, 7, 9, 11):
        assert_allclose(sphere_area(d), 2 * np.pi ** (d / 2) / gamma(d / 2), rtol=1e-15)
        assert_allclose(ball_volume(d), np.pi ** (d / 2) / gamma(d / 2 + 1), rtol=1e-15)
    assert_allclose(ball_volume(5), B5, rtol=1e-15)


def test_quadrature(grid):
    assert_allclose(grid.integrate_ball(np.ones(grid.shape)), B5, rtol=1e-12)
    assert_allclose(grid.integrate_sphere(np.ones(grid.shape[1])), S4, rtol=1e-12)
    assert_allclose(grid.integrate_ball(grid.Z**2), B5 / 7, rtol=1e-12)


@pytest.mark.parametrize("d", [7, 9, 11])
def test_quadrature_higher_dimensions(d):
    g = make_grid(d=d, n_r=16, n_theta=6)
    assert_allclose(g.integrate_ball(np.ones(g.shape)), ball_volume(d), rtol=1e-12)
    # int |xi|^2 = d/(d+2) |B|
    assert_allclose(g.integrate_ball(g.R**2), d / (d + 2) * ball_volume(d), rtol=1e-12)


def test_gridspec_validation():
    with pytest.raises(ConfigError):
        GridSpec(d=4)
    with pytest.raises(ConfigError):
        GridSpec(n_r=4)
    with pytest.raises(ConfigError):
        GridSpec(axis=5)


def test_linear_and_quadratic_derivatives(grid):
    f = grid.sample(lambda x: x[..., 4])
    assert_allclose(cartesian_derivative(f, 4).values, 1.0, atol=1e-12)
    q = grid.sample(lambda x: np.sum(x**2, axis=-1))
    pts = grid.cartesian_points()
    for j in range(5):
        assert_allclose(cartesian_derivative(q, j).values, 2 * pts[..., j], atol=1e-12)


def test_profile_gradient():
    g = make_grid(d=5, n_r=48, n_theta=12)
    alpha = axis_rapidity(0.1, 5)
    pts = g.cartesian_points()
    f = ScalarField(static_profile(pts, alpha), g)
    exact = static_profile_gradient(pts, alpha)
    for j in range(5):
        assert np.abs(cartesian_derivative(f, j).values - exact[..., j]).max() < 1e-8


def test_mixed_partials_against_polynomial(grid):
    # axisymmetric f = z^2 w + w^2, w = |xi_perp|^2; nodes sit at x1 = s, x2 = x3 = x4 = 0
    pts = grid.cartesian_points()
    f = grid.sample(lambda x: x[..., 4] ** 2 * np.sum(x[..., :4] ** 2, axis=-1)
                    + np.sum(x[..., :4] ** 2, axis=-1) ** 2)
    assert_allclose(partial(f, (2, 0, 0, 0, 1)).values, 4 * pts[..., 4], atol=1e-11)
    assert_allclose(partial(f, (1, 2, 0, 0, 0)).values, 8 * pts[..., 0], atol=1e-11)
    assert_allclose(partial(f, (0, 1, 0, 0, 0)).values, 0.0, atol=1e-11)


def test_multi_indices_count():
    from math import comb
    for k in range(4):
        assert len(list(multi_indices(5, k))) == comb(k + 4, 4)


def test_sobolev_seminorm(grid):
    assert sobolev_seminorm(grid.constant(3.0), 1) < 1e-13
    f = grid.sample(lambda x: x[..., 4])
    assert_allclose(sobolev_seminorm(f, 1), np.sqrt(B5), rtol=1e-12)
    q = grid.sample(lambda x: np.sum(x**2, axis=-1))
    assert_allclose(sobolev_seminorm(q, 2), 2 * np.sqrt(5) * np.sqrt(B5), rtol=1e-12)
    with pytest.raises(ConfigError):
        sobolev_seminorm(f, 4)


def test_laplacian_and_euler(grid):
    # |xi|^4: Lap = 4 (d + 2) |xi|^2, xi.grad = 4 |xi|^4
    v = grid.R**4
    assert_allclose(grid.laplacian(v), 4 * 7 * grid.R**2, atol=1e-11)
    assert_allclose(grid.euler(v), 4 * v, atol=1e-12)
    # z^3: Lap = 6 z
    assert_allclose(grid.laplacian(grid.Z**3), 6 * grid.Z, atol=1e-11)


def test_resolution_warning():
    g = make_grid(d=5, n_r=8, n_theta=6)
    f = g.sample(lambda x: np.exp(8 * x[..., 4]))
    with pytest.warns(ResolutionWarning):
        cartesian_derivative(f, 4)
    smooth = g.sample(lambda x: x[..., 4] ** 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cartesian_derivative(smooth, 4)


def test_field_arithmetic(grid):
    a = grid.constant(2.0)
    b = grid.sample(lambda x: x[..., 4])
    assert_allclose((a * b - b).values, b.values)
    p = FieldPair(a, b)
    assert_allclose((p * 2 - p).stacked(), p.stacked())
    assert p.max_abs() == 2.0


def test_harmonic_basis_round_trip(grid):
    basis = HarmonicBasis(grid)
    rng = np.random.default_rng(0)
    c = rng.standard_normal(basis.size)
    assert_allclose(basis.to_coeffs(basis.to_field(c)), c, atol=1e-11)
    # polynomials are reproduced exactly
    f = grid.sample(lambda x: x[..., 4] ** 3 - 2 * x[..., 0] ** 2 + 1)
    assert_allclose(basis.to_field(basis.to_coeffs(f)).values, f.values, atol=1e-13)


def test_radial_blocks_match_grid_operators(grid):
    basis = HarmonicBasis(grid)
    f = grid.sample(lambda x: x[..., 4] ** 2 * np.sum(x**2, axis=-1) + x[..., 4])
    c = basis.to_coeffs(f)
    E = np.zeros((basis.size, basis.size))
    Lap = np.zeros_like(E)
    for l in range(basis.L + 1):
        b = basis.block(l)
        E[b, b], Lap[b, b] = basis.radial_blocks(l)
    assert_allclose(basis.to_field(E @ c).values, grid.euler(f.values), atol=1e-11)
    assert_allclose(basis.to_field(Lap @ c).values, grid.laplacian(f.values), atol=1e-10)


def test_snapshot_round_trip(grid, tmp_path):
    f = grid.sample(lambda x: np.cos(x[..., 4]) + x[..., 0])
    path = tmp_path / "snap.csv"
    write_snapshot(path, f, tau=1.25)
    g, tau = read_snapshot(path)
    assert tau == 1.25
    assert np.array_equal(g.values, f.values)
