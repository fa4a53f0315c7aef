import numpy as np
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clarklab import perturbation as pt, presets, sio
from clarklab.cauchy import eps_grid
from clarklab.measures import LINE, Grid, Measure


def clark_pair(rng, n, alpha):
    mu = presets.random_line_atoms(rng, n)
    return mu, pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, alpha))


def test_zero_kernel_estimate(rng):
    mu, mua = clark_pair(rng, 6, 1.0)
    r = sio.restricted_bound_estimate(sio.zero_kernel(), mu, mua)
    assert r.lower == 0 and r.upper == 0


def test_hilbert_restricted_bound_for_clark_pair(rng):
    # restricted norm of the Hilbert kernel between mu and mu_alpha is at most 1/|alpha|
    for alpha in (1.0, 2.0, -0.5):
        mu, mua = clark_pair(rng, 12, alpha)
        r = sio.restricted_bound_estimate(sio.hilbert_kernel(), mu, mua, 2.0, 64, 1)
        assert r.lower <= 1.0 / abs(alpha) + 1e-12


def test_rank_one_kernel_closed_form(rng):
    mu = Measure(LINE, rng.uniform(-2, -1, 6), rng.uniform(0.5, 1, 6))
    nu = Measure(LINE, rng.uniform(1, 2, 5), rng.uniform(0.5, 1, 5))
    a = lambda x: np.exp(1j * x)
    b = lambda y: 1 / (1 + y ** 2)
    r = sio.restricted_bound_estimate(sio.rank_one_kernel(a, b), mu, nu, 2.0, 32, 0)
    # separable kernel: the norm is ||a||_{L2(nu)} ||b||_{L2(mu)}
    exact = (np.sqrt(np.sum(np.abs(a(nu.positions)) ** 2 * nu.weights))
             * np.sqrt(np.sum(np.abs(b(mu.positions)) ** 2 * mu.weights)))
    assert_allclose(r.lower, exact, rtol=1e-12)
    assert r.upper >= r.lower * (1 - 1e-12)


def test_multiplier_at_zero_is_one(rng):
    M = sio.SchurMultiplierSpec([0.0], [1.0])
    x, y = rng.normal(size=10), rng.normal(size=10)
    assert_allclose(M(x, y), 1.0)
    mu, mua = clark_pair(rng, 8, 1.0)
    K = sio.hilbert_kernel()
    a = sio.restricted_bound_estimate(K, mu, mua, 2.0, 16, 3).lower
    b = sio.restricted_bound_estimate(sio.schur_apply(K, M), mu, mua, 2.0, 16, 3).lower
    assert_allclose(a, b, rtol=1e-14)


def test_unimodular_phase_multiplier(rng):
    mu, mua = clark_pair(rng, 10, 2.0)
    r = sio.schur_bound_check(sio.hilbert_kernel(), sio.SchurMultiplierSpec([1.3], [1.0]), mu, mua)
    assert r.passed and r.km_lower <= r.k_upper * (1 + 1e-12)


def test_dilation_keeps_variation():
    M = sio.SchurMultiplierSpec([1.0, -2.0], [0.5, 0.25j])
    for e in (0.01, 1.0, 100.0):
        assert M.dilated(e).variation == M.variation


def test_cauchy_line_multiplier():
    rng = np.random.default_rng(8)
    for eps in (1.0, 0.1, 1e-3):
        m = sio.cauchy_multiplier_line(eps)
        assert m(0.0) == 0
        assert abs(m(1e9) - 1) < 1e-6
        x, y = rng.normal(size=100), rng.normal(size=100)
        assert_allclose(m(x - y) / (x - y), 1 / (x - y - 1j * eps), rtol=1e-12)


def test_scan_zero_kernel(rng):
    mu, mua = clark_pair(rng, 5, 1.0)
    s = sio.uniform_bound_scan(sio.zero_kernel(), "cauchy", mu, mua, eps_grid(1, 5), C_target=1.0)
    assert np.all(s.norms == 0)


@given(st.integers(0, 2 ** 31), st.sampled_from([1.0, -1.0, 2.0, 0.5]))
def test_scan_clark_pair_bounded(seed, alpha):
    rng = np.random.default_rng(seed)
    mu, mua = clark_pair(rng, int(rng.integers(2, 20)), alpha)
    s = sio.uniform_bound_scan(sio.hilbert_kernel(), "cauchy", mu, mua, eps_grid(1, 20),
                               C_target=2.0 / abs(alpha))
    assert s.passed


def test_discrete_hilbert_norm_approaches_pi():
    prev = 0.0
    for n in (100, 200, 400, 800):
        m = Measure(LINE, [], [], Grid(0.0, 1.0, np.ones(n)))
        s = sio.uniform_bound_scan(sio.hilbert_kernel(), "trunc", m, m, [0.5 / n], C_target=4.0)
        assert prev < s.sup < np.pi
        prev = s.sup
    assert prev > 0.99 * np.pi


@given(st.integers(0, 2 ** 31))
def test_schur_bound_random(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_line_atoms(rng, int(rng.integers(3, 15)))
    nu = Measure(LINE, mu.positions + rng.uniform(0.01, 0.05), rng.uniform(0.2, 1, mu.dim))
    m = int(rng.integers(1, 5))
    M = sio.SchurMultiplierSpec(rng.normal(size=m) * 3, rng.normal(size=m) + 1j * rng.normal(size=m))
    r = sio.schur_bound_check(sio.hilbert_kernel(), M, mu, nu, p=float(rng.choice([2.0, 3.0])),
                              trials=8, rng_seed=seed)
    assert r.passed


def test_circle_multiplier_coefficients():
    for r in (0.3, 0.9):
        cm = sio.cauchy_multiplier_circle(r)
        assert_allclose(cm.coefficient_l1(), 2.0, rtol=1e-15)
    for r in (1.5, 3.0):
        assert_allclose(sio.cauchy_multiplier_circle(r).coefficient_l1(), 2.0 / r, rtol=1e-15)
    cm = sio.cauchy_multiplier_circle(0.5)
    _, c = cm.coefficients(60)
    assert_allclose(np.sum(np.abs(c)), 2 - 0.5 ** 60, rtol=1e-15)


def test_well_mixed_uniform_level3():
    sigma = Measure(LINE, [], [], Grid(0.0, 1.0, np.ones(256)))
    pair = sio.well_mixed_sets(sigma, 3)
    assert pair.block_level == 4 and pair.max_error == 0.0 and pair.passed


def test_well_mixed_level0():
    sigma = presets.random_density(np.random.default_rng(2), 64)
    assert sio.well_mixed_sets(sigma, 0).passed


def test_well_mixed_excludes_atom():
    w = np.ones(64)
    w[10] = 0
    g = Grid(0.0, 1.0, w)
    sigma = Measure(LINE, [g.midpoints[10]], [0.3], g)
    pair = sio.well_mixed_sets(sigma, 2)
    assert list(pair.excluded_atoms) == [0]
    assert pair.passed


@given(st.integers(0, 2 ** 31), st.integers(0, 8))
def test_well_mixed_random_density(seed, n):
    sigma = presets.random_density(np.random.default_rng(seed), 4096)
    pair = sio.well_mixed_sets(sigma, n)
    assert pair.passed and pair.max_error <= 2.0 ** -n
    assert np.intersect1d(pair.E, pair.F).size == 0
