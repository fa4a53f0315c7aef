import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clarklab import halfplane as hp, presets
from clarklab.measures import LINE, Measure, poisson_mass, poisson_normalize
from clarklab.model import ModelError


def delta0():
    return Measure(LINE, [0.0], [1.0])


def normalized_line(rng, n):
    return poisson_normalize(presets.random_line_atoms(rng, n, half_width=3.0))


def test_cayley_round_trip(rng):
    z = rng.normal(size=50) + 1j * rng.uniform(0.01, 5, size=50)
    assert_allclose(hp.cayley_inverse(hp.cayley(z)), z, rtol=1e-14)
    assert np.all(np.abs(hp.cayley(z)) < 1)
    assert_allclose(np.abs(hp.cayley(rng.normal(size=20))), 1.0, rtol=1e-14)


def test_cayley_poles():
    with pytest.raises(hp.CayleyError):
        hp.cayley(-1j)
    with pytest.raises(hp.CayleyError):
        hp.cayley_inverse(1.0)


def test_gamma_examples():
    mu = delta0()
    assert hp.gamma_of_alpha(mu, 0.0) == 1
    assert_allclose(hp.Q_value(mu), -1j, atol=1e-15)
    assert abs(hp.gamma_of_alpha(mu, 1j)) < 1e-15
    g = hp.gamma_of_alpha(mu, 1.0)
    assert_allclose(g, 1j, atol=1e-15)
    assert abs(abs(g) - 1) < 1e-15


def test_gamma_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        hp.gamma_of_alpha(delta0(), -1j)


@given(st.integers(0, 2 ** 31), st.floats(-5, 5), st.floats(1e-3, 10))
def test_gamma_dichotomy(seed, re, im):
    mu = presets.random_line_atoms(np.random.default_rng(seed), 4, half_width=3.0)
    assert abs(hp.gamma_of_alpha(mu, complex(re, im))) < 1
    assert abs(abs(hp.gamma_of_alpha(mu, re)) - 1) < 1e-12


def test_pushforward_examples():
    pd = hp.pushforward_to_circle(delta0())
    assert_allclose(np.exp(1j * pd.positions), [-1.0], atol=1e-15)
    assert_allclose(pd.weights, [1.0])
    pm = hp.pushforward_to_circle(Measure(LINE, [-1.0, 1.0], [0.5, 0.5]))
    assert_allclose(pm.weights, [0.5, 0.5], rtol=1e-14)
    assert_allclose(sorted(np.exp(1j * pm.positions).imag), [-1.0, 1.0], atol=1e-15)


def test_pushforward_rejects_density():
    mu = Measure(LINE, [], [], presets.random_density(np.random.default_rng(0), 16).grid)
    with pytest.raises(ModelError):
        hp.pushforward_to_circle(mu)


@given(st.integers(0, 2 ** 31))
def test_pushforward_mass(seed):
    mu = presets.random_line_atoms(np.random.default_rng(seed), 7, half_width=4.0)
    assert abs(hp.pushforward_to_circle(mu).mass - 1) < 1e-13


def test_transfer_is_unitary(rng):
    mu = presets.random_line_atoms(rng, 6, half_width=2.0)
    f = rng.normal(size=6) + 1j * rng.normal(size=6)
    muT = hp.pushforward_to_circle(mu)
    g = hp.transfer(mu, f)
    assert_allclose(muT.inner(g, g), mu.inner(f, f), rtol=1e-12)
    assert_allclose(hp.transfer_back(mu, g), f, rtol=1e-13)


def test_transfer_identities(rng):
    mu = normalized_line(rng, 3)
    f = rng.normal(size=3) + 1j * rng.normal(size=3)
    w = rng.normal(size=20) + 1j * rng.uniform(0.1, 3, size=20)
    R, R1, R2 = hp.circle_transforms_at(mu, f, w)
    assert_allclose(hp.halfplane_R(mu, f, w), R, atol=1e-12)
    assert_allclose(hp.halfplane_R1(mu, f, w), R1, atol=1e-12)
    assert_allclose(hp.halfplane_R2(mu, f, w), R2, atol=1e-12)


def test_R_at_i_kernel(rng):
    mu = normalized_line(rng, 4)
    f = rng.normal(size=4) + 0j
    t, m = mu.positions, mu.weights
    direct = np.sum(f * m * (1 / (t - 1j) - 1 / (t + 1j))) / (2j * poisson_mass(mu))
    assert_allclose(hp.halfplane_R(mu, f, 1j), direct, rtol=1e-13)
    # the second kernel is the mean of the other two
    w = 0.3 + 2j
    assert_allclose(hp.halfplane_R2(mu, f, w),
                    hp.halfplane_R(mu, f, w) + hp.halfplane_R1(mu, f, w), rtol=1e-12)


def test_halfplane_rejects_lower_points():
    with pytest.raises(ValueError):
        hp.halfplane_R(delta0(), np.ones(1), -0.5j)


def test_theta_at_i(rng):
    mu = normalized_line(rng, 3)
    g = 0.3 - 0.4j
    assert_allclose(hp.theta_halfplane(mu, g, 1j), -g, atol=1e-14)


def test_theta_route_agreement(rng):
    mu = normalized_line(rng, 3)
    g = presets.random_disc_point(rng)
    w = rng.normal(size=20) + 1j * rng.uniform(0.05, 4, size=20)
    assert_allclose(hp.theta_halfplane(mu, g, w), hp.theta_halfplane_circle(mu, g, w), atol=1e-12)


def test_cayley_matrix_identity(rng):
    mu = presets.random_line_atoms(rng, 6, half_width=2.0)
    for a in (0.7j, 1.3 + 0.2j, 2.0):
        assert hp.cayley_identity_residual(mu, a) < 1e-10
    assert hp.conjugation_residual(mu, 0.5 + 1j) < 1e-10


def test_phi_constant_closed_form():
    # f = 1, f~(s) - f~(z) = s - z, so the integral is (1 / 2iP) integral (z + i)/(s + i) d mu
    mu = poisson_normalize(Measure(LINE, [-1.0, 0.5, 2.0], [1.0, 2.0, 1.0]))
    g = 0.25j
    u = hp.phi_star_halfplane_universal(mu, g, np.ones(3), N=256)
    v = hp.phi_star_halfplane_circle(mu, g, np.ones(3), N=256)
    assert np.max(np.abs(u.stack() - v.stack())) < 1e-8


@given(st.integers(0, 2 ** 31))
def test_universal_circle_and_snf_routes(seed):
    rng = np.random.default_rng(seed)
    mu = normalized_line(rng, 3)
    g = presets.random_disc_point(rng, 0.7)
    f = rng.normal(size=3) + 1j * rng.normal(size=3)
    u = hp.phi_star_halfplane_universal(mu, g, f, N=256)
    c = hp.phi_star_halfplane_circle(mu, g, f, N=256)
    s, bad = hp.phi_star_halfplane_snf(mu, g, f, N=256)
    keep = np.setdiff1d(np.arange(256), bad)
    assert hp._scaled_distance(u, c) < 1e-8
    assert np.max(np.abs((u.stack() - s.stack())[:, keep] * (u.x[keep] + 1j))) < 1e-7


def test_halfplane_gram(rng):
    mu = normalized_line(rng, 5)
    G = hp.halfplane_gram(mu, 0.2 + 0.5j)
    assert np.max(np.abs(G - np.eye(5))) < 1e-9


def test_halfplane_requires_disc_gamma(rng):
    with pytest.raises(ValueError):
        hp.phi_star_halfplane_universal(normalized_line(rng, 2), 1.0, np.ones(2))


def test_general_P_scaling(rng):
    mu = presets.random_line_atoms(rng, 4, half_width=2.0).scaled(2.5)
    f = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert hp.scaling_residual(mu, 0.3 + 0.8j, f) < 1e-8


def test_route_report(rng):
    mu = presets.random_line_atoms(rng, 5, half_width=3.0)
    r = hp.route_residuals(mu, 0.4 + 1j, N=256, seed=3)
    assert abs(r.gamma) < 1
    assert r.residuals["gram"] < 1e-9
    assert max(v for k, v in r.residuals.items() if k != "gram") < 1e-7
