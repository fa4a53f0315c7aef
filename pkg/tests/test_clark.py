import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clarklab import clark, model, perturbation as pt, presets
from clarklab.cauchy import PLUS, boundary_values
from clarklab.measures import CIRCLE, Measure


def cf_for(mu, gamma):
    return model.characteristic_function(mu, gamma, clark.choose_grid(mu, gamma))


def smooth_f(rng, mu):
    f = rng.normal(size=mu.dim) + 1j * rng.normal(size=mu.dim)
    if mu.grid is not None:
        x = mu.grid.midpoints
        f[mu.n_atoms:] = np.where(mu.grid.density > 0, rng.normal() + np.cos(x) + 1j * np.sin(2 * x), 0)
    return f


@pytest.mark.parametrize("mu", [presets.three_atom_circle(), presets.mixed(128),
                                presets.lebesgue_grid(128)], ids=["atoms", "mixed", "lebesgue"])
def test_constant_maps_to_defect_vector(mu):
    cf = cf_for(mu, 0.3 - 0.2j)
    v = clark.phi_star_universal(mu.ones(), cf)
    c = model.defect_vectors_model(cf).c
    assert model.sample_distance(v, c) < 1e-12


@given(st.integers(0, 2 ** 31))
def test_gram_and_intertwining(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_circle_atoms(rng, int(rng.integers(1, 60)))
    ci = clark.clark_inner(mu, presets.random_disc_point(rng, 0.8))
    assert ci.gram_residual() < 1e-10
    assert ci.intertwining_residual() < 1e-9
    assert ci.evaluation_intertwining() < 1e-9


def test_intertwining_on_grid_basis(rng):
    mu = presets.random_circle_atoms(rng, 5)
    g = 0.4 + 0.1j
    cf = cf_for(mu, g)
    U = pt.build_U_param(pt.UnitaryFamily(mu, g)).matrix
    S = model.compressed_shift(cf)
    for k in range(5):
        e = np.zeros(5, dtype=complex)
        e[k] = 1 / np.sqrt(mu.weights[k])
        Ue = mu.from_coords(U @ mu.to_coords(e))
        d = clark.phi_star_universal(Ue, cf) - S(clark.phi_star_universal(e, cf))
        assert model.model_norm(d) < 1e-9


def test_snf_constant_gamma_zero():
    mu = presets.three_atom_circle()
    cf = cf_for(mu, 0.0)
    r = clark.phi_star_snf(mu.ones(), cf)
    assert_allclose(r.vector.g1, model.defect_vectors_model(cf).c.g1, atol=1e-10)


def test_tplus_identity_on_grid():
    mu = presets.three_atom_circle()
    cf = model.characteristic_function(mu, 0.0, 256)
    bv = boundary_values(mu, None, PLUS, cf.z, rtol=1e-12)
    assert np.max(np.abs(bv.values - 1 / (1 - cf.theta0))) < 1e-8


def test_snf_vs_universal_three_atoms(rng):
    mu = presets.three_atom_circle()
    cf = cf_for(mu, -0.2 + 0.5j)
    f = smooth_f(rng, mu)
    r = clark.phi_star_snf(f, cf)
    assert model.sample_distance(r.vector, clark.phi_star_universal(f, cf)) < 1e-8


def test_dbr_constant():
    mu = presets.three_atom_circle()
    g = 0.3 + 0.3j
    cf = cf_for(mu, g)
    d = clark.dbr_components(mu.ones(), cf).vector
    s = np.sqrt(1 - abs(g) ** 2)
    assert_allclose(d.g_plus, s / (1 - np.conj(g) * cf.theta0), atol=1e-9)
    assert_allclose(d.g_minus, np.conj(cf.theta) * d.g_plus, atol=1e-9)


def test_dbr_vs_transcription(rng):
    mu = presets.three_atom_circle()
    cf = cf_for(mu, 0.5)
    f = smooth_f(rng, mu)
    d = clark.dbr_components(f, cf).vector
    t = model.transcription_map(clark.phi_star_universal(f, cf), cf)
    assert np.max(np.abs(d.g_plus - t.g_plus)) < 1e-8
    assert np.max(np.abs(d.g_minus - t.g_minus)) < 1e-8


@given(st.integers(0, 2 ** 31))
def test_triple_agreement_atomic(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_circle_atoms(rng, int(rng.integers(1, 9)))
    cf = cf_for(mu, presets.random_disc_point(rng, 0.8))
    tr = clark.clark_routes(smooth_f(rng, mu), cf)
    assert max(tr.residuals.values()) < 1e-7


def test_triple_agreement_mixed(rng):
    mu = presets.mixed(256)
    cf = cf_for(mu, 0.2 - 0.4j)
    tr = clark.clark_routes(smooth_f(rng, mu), cf)
    assert max(tr.residuals.values()) < 1e-7


def test_universal_ab_coefficients_agree():
    for mu in (presets.three_atom_circle(), presets.mixed(128)):
        cf = cf_for(mu, 0.35)
        assert clark.A_B_coefficients(cf).agreement < 1e-10


@pytest.mark.parametrize("mu", [presets.three_atom_circle(), presets.mixed(128)], ids=["atoms", "mixed"])
def test_forward_recovers_constant(mu):
    cf = cf_for(mu, 0.25j)
    v = clark.phi_star_universal(mu.ones(), cf)
    r = clark.phi_forward(model.transcription_map(v, cf), cf)
    tol = 1e-8 if mu.grid is None else 1e-6
    assert_allclose(r.f_s, 1.0, atol=tol)
    if mu.grid is not None:
        live = mu.grid.density > 0
        assert_allclose(r.f_a[live], 1.0, atol=tol)


def test_forward_atomic_matches_matrix_inverse(rng):
    mu = presets.random_circle_atoms(rng, 6)
    g = -0.3 + 0.3j
    cf = cf_for(mu, g)
    f = smooth_f(rng, mu)
    r = clark.phi_forward(model.transcription_map(clark.phi_star_universal(f, cf), cf), cf)
    assert r.f_a.size == 0
    ci = clark.clark_inner(mu, g)
    vals = clark.top_inside(mu, g, f, ci.model.zeros)
    coords = ci.inverse(vals)
    assert_allclose(mu.from_coords(coords), f, rtol=1e-9)
    assert_allclose(r.f_s, f, rtol=1e-9)


def test_forward_lebesgue(rng):
    mu = presets.lebesgue_grid(256)
    cf = cf_for(mu, 0.4)
    f = smooth_f(rng, mu)
    r = clark.phi_forward(model.transcription_map(clark.phi_star_universal(f, cf), cf), cf)
    assert r.f_s.size == 0
    assert np.max(np.abs(r.f_a - f)) < 1e-6


def test_round_trip_mixed(rng):
    mu = presets.mixed(256)
    cf = cf_for(mu, -0.1 + 0.6j)
    assert clark.round_trip_error(smooth_f(rng, mu), cf) < 1e-6


def test_normalized_cauchy_at_atoms(rng):
    for mu in (presets.three_atom_circle(), presets.mixed(128)):
        f = smooth_f(rng, mu)
        v, conv = clark.normalized_cauchy_at_atoms(mu, f)
        assert np.all(conv)
        assert_allclose(v, f[:mu.n_atoms], atol=1e-6)


def test_alpha_one_is_snf(rng):
    mu = presets.three_atom_circle()
    cf = cf_for(mu, 0.3)
    f = smooth_f(rng, mu)
    a = clark.phi_star_alpha(f, 1.0, cf, mu).vector
    b = clark.phi_star_snf(f, cf).vector
    assert np.array_equal(a.g1, b.g1) and np.array_equal(a.g2, b.g2)


def test_alpha_two_atoms():
    mu = Measure(CIRCLE, [0.0, np.pi], [0.5, 0.5])
    alpha, g = -1.0, 0.5
    mua = pt.spectral_measure_perturbed(pt.UnitaryFamily(mu, alpha))
    cf = cf_for(mu, g)
    f = np.array([1.0, -0.5 + 2j])
    direct = clark.phi_star_alpha(f, alpha, cf, mua).vector
    comp = clark.phi_star_alpha_composition(f, alpha, cf, mua)
    assert model.sample_distance(direct, comp) < 1e-8
    second = clark.phi_star_alpha(f, alpha, cf, mua, second_form=True).vector
    assert model.sample_distance(second, comp) < 1e-8


@given(st.integers(0, 2 ** 31))
def test_alpha_gram(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_circle_atoms(rng, int(rng.integers(1, 30)))
    a = complex(np.exp(1j * rng.uniform(-np.pi, np.pi)))
    g = presets.random_disc_point(rng, 0.8)
    mua = pt.spectral_measure_perturbed(pt.UnitaryFamily(mu, a))
    W = model.inner_model(mu, g).to_orthonormal(clark.clark_alpha_inner(mu, mua, a, g))
    assert np.max(np.abs(np.conj(W).T @ W - np.eye(W.shape[1]))) < 1e-9


def test_alpha_composition_lebesgue_converges():
    # V_alpha adjoint on a grid carries an O(1/N) discretisation error
    errs = []
    for N in (128, 256, 512, 1024):
        mu = presets.lebesgue_grid(N)
        cf = cf_for(mu, 0.2)
        x = mu.grid.midpoints
        f = 0.3 + np.cos(x) + 1j * np.sin(2 * x)
        a = np.exp(0.9j)
        direct = clark.phi_star_alpha(f, a, cf, mu).vector
        errs.append(model.sample_distance(direct, clark.phi_star_alpha_composition(f, a, cf, mu)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 1.8)
    assert errs[-1] < 2e-3


def test_alpha_composition_mixed_rejected(rng):
    mu = presets.mixed(64)
    with pytest.raises(model.ModelError):
        clark.V_alpha_adjoint(mu.ones(), mu, mu, np.exp(0.3j))


def test_grid_choice_reaches_target(rng):
    mu = presets.random_circle_atoms(rng, 20)
    N = clark.choose_grid(mu, 0.7)
    assert clark.grid_resolution(mu, 0.7, N) >= 80 or N == 16384
    assert N & (N - 1) == 0
