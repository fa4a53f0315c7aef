import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clarklab import perturbation as pt, presets
from clarklab.cauchy import cauchy_line
from clarklab.measures import CIRCLE, LINE, Measure


def test_rank_one_inverse_half_norm():
    a = np.array([0.5, 0.5])          # ||a||^2 = 1/2
    inv = pt.rank_one_inverse(a, a)
    assert_allclose(inv, np.eye(2) + 2 * np.outer(a, a), rtol=1e-15)


def test_rank_one_inverse_zero_b():
    assert_allclose(pt.rank_one_inverse([1.0, 2.0, 3.0], np.zeros(3)), np.eye(3))


def test_rank_one_inverse_composes_to_identity(rng):
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    b = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert_allclose(pt.rank_one_inverse(a, b) @ pt.rank_one_operator(a, b), np.eye(5), atol=1e-13)


def test_rank_one_inverse_singular():
    a = np.array([1.0, 0.0])
    with pytest.raises(pt.SingularPerturbationError):
        pt.rank_one_inverse(a, a)


def test_A_alpha_single_atom():
    A = pt.build_A_alpha(pt.SelfAdjointFamily(Measure(LINE, [0.0], [1.0]), 3.0)).matrix
    assert_allclose(A, [[3.0]])


def test_A_alpha_two_atoms():
    A = pt.build_A_alpha(pt.SelfAdjointFamily(presets.two_atom(), 2.0)).matrix
    assert_allclose(A, [[0, 1], [1, 2]], atol=1e-15)
    # characteristic polynomial s^2 - 2 s - 1
    assert_allclose(np.linalg.eigvalsh(A), [1 - np.sqrt(2), 1 + np.sqrt(2)], rtol=1e-14)


def test_U_alpha_two_atoms_unitary():
    mu = Measure(CIRCLE, [0.0, np.pi], [0.5, 0.5])
    U = pt.build_U_param(pt.UnitaryFamily(mu, -1.0)).matrix
    assert pt.unitarity_residual(U) < 1e-14
    assert_allclose(abs(np.linalg.det(U)), 1.0, rtol=1e-14)


def test_resolvent_alpha_zero_is_plain():
    mu = presets.two_atom()
    f = np.array([1.0, 2.0])
    assert_allclose(pt.resolvent_perturbed(pt.SelfAdjointFamily(mu, 0.0), f, 0.5j), f / (mu.positions - 0.5j))


def test_resolvent_one_by_one():
    # A = [1]; (1 - i)^{-1}
    r = pt.resolvent_perturbed(pt.SelfAdjointFamily(Measure(LINE, [0.0], [1.0]), 1.0), [1.0], 1j)
    assert_allclose(r, [1 / (1 - 1j)], rtol=1e-15)


def test_resolvent_matches_dense_solve(rng):
    mu = presets.random_line_atoms(rng, 5)
    fam = pt.SelfAdjointFamily(mu, -1.3)
    f = rng.normal(size=5) + 1j * rng.normal(size=5)
    lam = 0.2 + 0.7j
    A = pt.build_A_alpha(fam).matrix
    direct = mu.from_coords(np.linalg.solve(A - lam * np.eye(5), mu.to_coords(f)))
    assert_allclose(pt.resolvent_perturbed(fam, f, lam), direct, rtol=1e-12)


def test_aronszajn_krein_single_atom():
    mu = Measure(LINE, [0.0], [1.0])
    lam = np.array([1j, 2 - 0.5j, -3 + 1j])
    Fa = pt.aronszajn_krein(pt.F_field(mu, lam), 2.5).values
    assert_allclose(Fa, -1.0 / (lam - 2.5), rtol=1e-14)
    mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, 2.5))
    assert_allclose(mua.positions, [2.5]) and assert_allclose(mua.weights, [1.0])


def test_aronszajn_krein_alpha_zero():
    F = pt.F_field(presets.two_atom(), [1j, 0.3 + 2j])
    assert_allclose(pt.aronszajn_krein(F, 0.0).values, F.values)


@given(st.integers(0, 2 ** 31), st.floats(-3, 3).filter(lambda a: abs(a) > 0.05))
def test_imaginary_part_identity(seed, alpha):
    rng = np.random.default_rng(seed)
    mu = presets.random_line_atoms(rng, int(rng.integers(1, 12)))
    lam = rng.normal(size=6) + 1j * rng.uniform(0.05, 3, size=6)
    F = pt.F_field(mu, lam).values
    Fa = pt.aronszajn_krein(pt.F_field(mu, lam), alpha).values
    assert_allclose(Fa.imag, F.imag / np.abs(1 + alpha * F) ** 2, rtol=1e-10)


@given(st.integers(0, 2 ** 31), st.sampled_from([1.0, -1.0, 2.0, -2.0, 0.5]))
def test_aronszajn_krein_vs_eigen_oracle(seed, alpha):
    rng = np.random.default_rng(seed)
    mu = presets.random_line_atoms(rng, int(rng.integers(2, 30)))
    lam = rng.uniform(-2, 2, 20) + 1j * rng.choice([-1, 1], 20) * rng.uniform(0.1, 2, 20)
    mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, alpha))
    ak = pt.aronszajn_krein(pt.F_field(mu, lam), alpha).values
    oracle = cauchy_line(mua, None, lam)
    assert np.max(np.abs(ak - oracle) / np.abs(oracle)) < 1e-10
    assert pt.interlacing_report(mu.positions, mua.positions, alpha).interlaced


def test_spectral_measure_two_atoms():
    mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(presets.two_atom(), 2.0))
    assert_allclose(mua.positions, [1 - np.sqrt(2), 1 + np.sqrt(2)], rtol=1e-14)
    vals, vecs = np.linalg.eigh(np.array([[0.0, 1.0], [1.0, 2.0]]))
    phi = np.sqrt([0.5, 0.5])
    assert_allclose(mua.weights, np.abs(vecs.T @ phi) ** 2, rtol=1e-13)
    assert_allclose(mua.weights.sum(), 1.0, rtol=1e-15)
    assert_allclose(mua.weights, pt.secular_weights(presets.two_atom(), 2.0, mua.positions), rtol=1e-13)


def test_unitary_eigenvalues_unimodular(rng):
    mu = presets.random_circle_atoms(rng, 12)
    ev = pt.unitary_eigenvalues(pt.UnitaryFamily(mu, np.exp(0.7j)))
    assert_allclose(np.abs(ev), 1.0, atol=1e-13)


@given(st.integers(0, 2 ** 31))
def test_secular_clark_measure_matches_schur(seed):
    rng = np.random.default_rng(seed)
    mu = presets.random_circle_atoms(rng, int(rng.integers(1, 25)))
    g = complex(np.exp(1j * rng.uniform(-np.pi, np.pi)))
    sec = pt.clark_measure_secular(mu, g)
    U = pt.build_U_param(pt.UnitaryFamily(mu, g)).matrix
    schur = pt._eig_measure_circle(U, np.sqrt(mu.weights).astype(complex), "")
    assert_allclose(sec.points, schur.points, atol=1e-12)
    assert_allclose(sec.weights, schur.weights, atol=1e-12)
    assert pt.circle_interlacing(mu.positions, sec.positions)


def test_defect_factor():
    mu = presets.three_atom_circle()
    assert pt.defect_data(pt.UnitaryFamily(mu, 0.0)).defect_norm_factor == 1.0
    assert_allclose(pt.defect_data(pt.UnitaryFamily(mu, 0.5)).defect_norm_factor, np.sqrt(3) / 2)


def test_defect_identity_dim3():
    assert pt.defect_residual(pt.UnitaryFamily(presets.three_atom_circle(), 0.3 + 0.4j)) < 1e-14


def test_contractive_family_has_no_spectral_measure():
    with pytest.raises(ValueError):
        pt.spectral_measure_perturbed(pt.UnitaryFamily(presets.three_atom_circle(), 0.5))


def test_krylov_cyclic():
    mu = presets.random_line_atoms(np.random.default_rng(1), 8)
    A = pt.build_A_alpha(pt.SelfAdjointFamily(mu, 1.0)).matrix
    assert pt.krylov_cyclic(A, np.sqrt(mu.weights))[0]
    e = np.zeros(8)
    e[0] = 1
    assert not pt.krylov_cyclic(np.diag(mu.positions), e)[0]
