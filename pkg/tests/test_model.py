import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clarklab import clark, model, perturbation as pt, presets
from clarklab.measures import CIRCLE, Measure


def sample_f(rng, mu):
    """Random atom values; a smooth function on the density cells."""
    f = rng.normal(size=mu.dim) + 1j * rng.normal(size=mu.dim)
    if mu.grid is not None:
        x = mu.grid.midpoints
        f[mu.n_atoms:] = np.where(mu.grid.density > 0, rng.normal() + np.exp(1j * x) * rng.normal(), 0)
    return f


def disc_points(rng, n, rmax=0.95):
    return rmax * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def test_lebesgue_theta0_vanishes(rng):
    leb = presets.lebesgue_grid(512)
    assert np.max(np.abs(model.theta_from_measure(leb, 0.0, disc_points(rng, 50, 0.99)))) < 1e-12


@given(st.integers(0, 2 ** 31))
def test_theta_at_zero(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_circle_atoms(rng, int(rng.integers(1, 20)))
    g = presets.random_disc_point(rng, 0.95)
    assert abs(model.theta_from_measure(mu, g, 0.0) + g) < 1e-12


def test_single_atom_theta0_is_inner():
    mu = Measure(CIRCLE, [0.7], [1.0])
    cf = model.characteristic_function(mu, 0.0, 256)
    assert_allclose(np.abs(cf.theta0), 1.0, atol=1e-13)
    # degree one: theta0(lam) = conj(xi0) lam
    lam = np.array([0.3, -0.2 + 0.5j])
    assert_allclose(model.theta_from_measure(mu, 0.0, lam), np.exp(-0.7j) * lam, atol=1e-14)


def test_contraction_route_at_zero(rng):
    mu = presets.random_circle_atoms(rng, 4)
    g = 0.2 - 0.3j
    U = pt.build_U_param(pt.UnitaryFamily(mu, g)).matrix
    assert_allclose(model.char_function_from_contraction(U, 0.0), -U, atol=0)


def test_contraction_route_one_atom():
    # U = [gamma xi] on a one-dimensional space
    mu = Measure(CIRCLE, [0.0], [1.0])
    for z in (0.0, 0.4, -0.3 + 0.6j):
        assert_allclose(model.contraction_theta(mu, 0.5, z), model.theta_from_measure(mu, 0.5, z),
                        atol=1e-14)


def test_contraction_route_dim4(rng):
    mu = presets.random_circle_atoms(rng, 4)
    for z in disc_points(rng, 10):
        a = model.contraction_theta(mu, 0.2 - 0.3j, z)
        b = model.theta_from_measure(mu, 0.2 - 0.3j, z)
        assert abs(a - b) <= 1e-8 * abs(b)


@given(st.integers(0, 2 ** 31))
def test_fractional_relation_round_trip(seed):
    rng = np.random.default_rng(seed)
    g = presets.random_disc_point(rng, 0.95)
    t = disc_points(rng, 8, 1.0)
    assert_allclose(model.inverse_fractional_relation(model.fractional_relation(t, g), g), t, atol=1e-12)
    assert np.all(np.abs(model.fractional_relation(t, g)) <= 1 + 1e-12)


def test_defect_vectors_zero_theta():
    cf = model.characteristic_function(presets.lebesgue_grid(128), 0.0)
    d = model.defect_vectors_model(cf)
    assert_allclose(d.c.g1, 1.0, atol=1e-13) and assert_allclose(d.c.g2, 0.0, atol=1e-13)
    assert_allclose(d.c1.g1, 0.0, atol=1e-13)
    assert_allclose(d.c1.g2, np.conj(cf.z), atol=1e-13)


def test_defect_vectors_inner_case():
    cf = model.characteristic_function(presets.three_atom_circle(), 0.3, 512)
    d = model.defect_vectors_model(cf)
    assert np.all(d.c.g2 == 0) and np.all(d.c1.g2 == 0)


def test_defect_vector_norm_lebesgue():
    cf = model.characteristic_function(presets.lebesgue_grid(1024), 0.5)
    assert_allclose(model.model_norm(model.defect_vectors_model(cf).c), 1.0, atol=1e-8)


def test_projection_idempotent_inner(rng):
    mu = presets.three_atom_circle()
    cf = model.characteristic_function(mu, 0.3 + 0.1j, clark.choose_grid(mu, 0.3 + 0.1j))
    v = clark.phi_star_universal(sample_f(rng, mu), cf)
    assert model.model_norm(model.snf_project(v, cf) - v) < 1e-10
    comp = model.snf_project(model.ModelVectorSNF(cf.theta, cf.delta), cf)
    assert model.model_norm(comp) < 1e-10


def test_projection_complement_lebesgue():
    cf = model.characteristic_function(presets.lebesgue_grid(256), 0.0)
    comp = model.snf_project(model.ModelVectorSNF(cf.theta, cf.delta), cf)
    assert model.model_norm(comp) < 1e-12


def _mixed_errors(n):
    mu = presets.mixed(n)
    cf = model.characteristic_function(mu, 0.25)
    f = np.ones(mu.dim, dtype=complex)
    f[mu.n_atoms:] = np.where(mu.grid.density > 0, 1 + np.exp(1j * mu.grid.midpoints), 0)
    v = clark.phi_star_universal(f, cf)
    S = model.compressed_shift(cf)
    return (model.model_norm(model.snf_project(v, cf) - v),
            model.model_norm(S.by_rank_one(v) - S.by_projection(v)))


def test_mixed_measure_grid_errors_shrink():
    # the density jumps to zero at the gap, so grid P_+ carries a Gibbs error
    errs = np.array([_mixed_errors(n) for n in (128, 256, 512, 1024)])
    assert np.all(np.diff(errs, axis=0) < 0)
    assert np.all(errs[-1] < 0.4 * errs[0])


def test_projection_rank_inner(rng):
    mu = presets.random_circle_atoms(rng, 5)
    g = 0.2
    cf = model.characteristic_function(mu, g, clark.choose_grid(mu, g))
    N = cf.N
    cols = []
    for _ in range(12):
        v = model.snf_project(model.ModelVectorSNF(rng.normal(size=N) + 1j * rng.normal(size=N),
                                                   np.zeros(N)), cf)
        cols.append(v.g1)
    s = np.linalg.svd(np.array(cols), compute_uv=False)
    assert np.sum(s > 1e-8 * s[0]) == 5


def test_transcription_zero_theta(rng):
    cf = model.characteristic_function(presets.lebesgue_grid(64), 0.0)
    v = model.ModelVectorSNF(rng.normal(size=64) + 0j, rng.normal(size=64) + 0j)
    d = model.transcription_map(v, cf)
    assert_allclose(d.g_plus, v.g1) and assert_allclose(d.g_minus, v.g2, atol=1e-13)


def test_transcription_inner(rng):
    cf = model.characteristic_function(presets.three_atom_circle(), 0.4j, 512)
    v = clark.phi_star_universal(rng.normal(size=3) + 0j, cf)
    d = model.transcription_map(v, cf)
    assert_allclose(d.g_minus, np.conj(cf.theta) * d.g_plus, atol=1e-14)


def test_transcription_norm_mixed(rng):
    mu = presets.mixed(256)
    cf = model.characteristic_function(mu, -0.3 + 0.2j)
    v = clark.phi_star_universal(sample_f(rng, mu), cf)
    d = model.transcription_map(v, cf)
    assert abs(model.dbr_norm(d, cf) - model.model_norm(v)) < 1e-6 * model.model_norm(v)
    back = model.inverse_transcription(d, cf)
    assert model.sample_distance(back, v) < 1e-12
    assert model.moore_penrose_residual(cf) < 1e-8


def test_compressed_shift_constructions_agree(rng):
    for mu in (presets.three_atom_circle(), presets.random_circle_atoms(rng, 9)):
        cf = model.characteristic_function(mu, 0.25, clark.choose_grid(mu, 0.25))
        S = model.compressed_shift(cf)
        v = clark.phi_star_universal(sample_f(rng, mu), cf)
        assert model.model_norm(S.by_rank_one(v) - S.by_projection(v)) < 1e-8 * model.model_norm(v)


def test_inner_score_and_flag():
    cf = model.characteristic_function(presets.three_atom_circle(), 0.3, 512)
    assert cf.is_inner and cf.inner_score < 1e-12
    cf = model.characteristic_function(presets.mixed(128), 0.3)
    assert not cf.is_inner


def test_takenaka_malmquist_orthonormal(rng):
    mu = presets.random_circle_atoms(rng, 8)
    m = model.inner_model(mu, 0.1 + 0.2j)
    G = m.kernel_gram()
    assert G.shape == (8, 8)
    assert np.allclose(G, np.conj(G).T)
