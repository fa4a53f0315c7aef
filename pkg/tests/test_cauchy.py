import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clarklab import perturbation as pt, presets
from clarklab.cauchy import (MINUS, PLUS, BoundaryError, T_boundary_exact, boundary_values,
                             cauchy_circle_R, cauchy_circle_R1, cauchy_circle_R2, cauchy_line,
                             eps_grid, radial_limit, regularized_T_eps_line,
                             regularized_T_r_circle)
from clarklab.measures import CIRCLE, LINE, Grid, Measure


def delta0():
    return Measure(LINE, [0.0], [1.0])


def test_cauchy_line_single_atom_at_i():
    assert_allclose(cauchy_line(delta0(), None, 1j), 1j, rtol=1e-15)


def test_cauchy_line_two_atoms():
    v = cauchy_line(presets.two_atom(), None, 2j)
    assert_allclose(v, 0.5 / (-1 - 2j) + 0.5 / (1 - 2j), rtol=1e-15)


@given(st.floats(-5, 5), st.floats(0.01, 5))
def test_cauchy_line_herglotz(x, y):
    assert cauchy_line(delta0(), None, complex(x, y)).imag > 0


def test_cauchy_line_rejects_point_in_density():
    mu = Measure(LINE, [], [], Grid(0.0, 1.0, np.ones(8)))
    with pytest.raises(BoundaryError):
        cauchy_line(mu, None, 0.3)


def test_circle_transforms_lebesgue():
    # only the constant Fourier mode of arc length survives
    leb = presets.lebesgue_grid(256)
    lam = np.array([0.0, 0.3 + 0.2j, -0.7j, 0.9])
    assert_allclose(cauchy_circle_R(leb, None, lam), 1.0, atol=1e-13)
    assert_allclose(cauchy_circle_R1(leb, None, lam), 0.0, atol=1e-13)
    assert_allclose(cauchy_circle_R2(leb, None, lam), 1.0, atol=1e-13)


def test_circle_R_single_atom_at_zero():
    assert_allclose(cauchy_circle_R(Measure(CIRCLE, [1.2], [1.0]), None, 0.0), 1.0)


@given(st.integers(0, 2 ** 31))
def test_R2_is_two_R_minus_mass(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_circle_atoms(rng, int(rng.integers(1, 10))).scaled(rng.uniform(0.5, 3))
    lam = 0.9 * rng.uniform(size=5) * np.exp(2j * np.pi * rng.uniform(size=5))
    assert_allclose(cauchy_circle_R2(mu, None, lam), 2 * cauchy_circle_R(mu, None, lam) - mu.mass,
                    atol=1e-13)


def test_regularized_single_point():
    T = regularized_T_eps_line(delta0(), delta0(), "cauchy_plus", 1.0)
    assert_allclose(T.matrix, [[-1j]], rtol=1e-15)


def test_truncation_inside_eps_vanishes():
    mu = Measure(LINE, [0.0, 0.1, 0.2], [1.0, 1.0, 1.0])
    nu = Measure(LINE, [0.05, 0.15], [1.0, 1.0])
    assert np.all(regularized_T_eps_line(mu, nu, "trunc", 1.0).matrix == 0)


def test_regularized_norms_bounded_for_clark_pair():
    mu = presets.two_atom()
    mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, 1.0))
    norms = [np.linalg.norm(regularized_T_eps_line(mu, mua, "cauchy_plus", e).matrix, 2)
             for e in eps_grid(0, 20)]
    # singular-value oracle: norms stay below the uniform constant 2/|alpha|
    assert max(norms) <= 2.0
    assert max(norms[-10:]) / min(norms[-10:]) < 1.05


def test_circle_r_zero_is_rank_one():
    mu = presets.three_atom_circle()
    T = regularized_T_r_circle(mu, mu, 0.0).matrix
    assert np.linalg.matrix_rank(T, tol=1e-12) == 1
    f = np.array([1.0, -2.0, 0.5j])
    # T_0 f is the constant integral of f, in coordinates
    assert_allclose(mu.from_coords(T @ mu.to_coords(f)), np.sum(f * mu.weights), rtol=1e-14)


def test_circle_lebesgue_constant_fixed():
    leb = presets.lebesgue_grid(64)
    for r in (0.2, 0.5, 0.9):
        T = regularized_T_r_circle(leb, leb, r)
        out = T.target.from_coords(T.matrix @ T.source.to_coords(T.source.ones()))
        # midpoint sampling of the Fourier series leaves 1 / (1 - r^N)
        assert_allclose(out, 1.0 / (1.0 - r ** 64), rtol=1e-12)


def test_circle_norms_bounded_for_clark_pair():
    mu = presets.three_atom_circle()
    mua = pt.spectral_measure_perturbed(pt.UnitaryFamily(mu, -1.0))
    norms = [np.linalg.norm(regularized_T_r_circle(mu, mua, r).matrix, 2)
             for r in (0.5, 0.9, 0.99, 1.01, 1.1, 2.0)]
    assert max(norms) < 10


def test_lebesgue_boundary_values():
    leb = presets.lebesgue_grid(128)
    z = np.exp(1j * np.linspace(-3, 3, 11) + 0.001j)
    tp = boundary_values(leb, None, PLUS, z, rtol=1e-11)
    tm = boundary_values(leb, None, MINUS, z, rtol=1e-11)
    assert tp.all_converged and tm.all_converged
    assert_allclose(tp.values, 1.0, atol=1e-9)
    assert_allclose(tm.values, 0.0, atol=1e-9)


def test_fatou_jump_on_density():
    rng = np.random.default_rng(4)
    mu = presets.mixed(128)
    f = rng.normal(size=mu.dim) + 1j * rng.normal(size=mu.dim)
    z = mu.grid.midpoints
    z = np.exp(1j * z)
    tp = boundary_values(mu, f, PLUS, z, rtol=1e-11)
    tm = boundary_values(mu, f, MINUS, z, rtol=1e-11)
    ok = tp.converged_flags & tm.converged_flags
    jump = tp.values - tm.values - mu.grid.density * f[mu.n_atoms:]
    assert ok.mean() > 0.9
    assert np.max(np.abs(jump[ok])) < 1e-5


def test_radial_limit_matches_closed_form():
    # exact boundary values of cell integrals against Richardson extrapolation
    mu = Measure(LINE, [], [], Grid(-1.0, 1.0, 1.0 + np.linspace(0, 1, 32) ** 2))
    s = np.array([-0.51, 0.013, 0.77])
    bv = boundary_values(mu, None, PLUS, s, rtol=1e-12)
    assert_allclose(bv.values, T_boundary_exact(mu, None, PLUS, s), atol=1e-9)


def test_radial_limit_flags_nonconvergence():
    vals, conv = radial_limit(lambda lam: np.sin(1.0 / (lam - 1.0)), [1.0], PLUS, True, kmax=20)
    assert not conv[0]


def test_eps_grid():
    g = eps_grid(0, 20)
    assert g.size == 21 and g[0] == 1.0 and g[-1] == 2.0 ** -20
