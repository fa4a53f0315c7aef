"""Characteristic functions and the model space K_theta.

Boundary functions live on the uniform grid z_j = exp(i(-pi + (j + 1/2) 2pi / N)).
The model space is

    K_theta = (H^2, clos Delta L^2) minus (theta, Delta) H^2

in the Sz.-Nagy-Foias transcription, and pairs (g_plus, g_minus) with
g_minus - conj(theta) g_plus in Delta L^2 in the de Branges-Rovnyak one.
Inner products on the grid are plain means, i.e. |dz| / 2pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .cauchy import PLUS, boundary_exact, cauchy_circle_R1, cauchy_circle_R2
from .measures import TWO_PI, Measure, MeasureError, require_circle
from .perturbation import UnitaryFamily, build_U_param

DEFAULT_GRID = 2 ** 12
MP_CUTOFF = 1e-10


class ModelError(ValueError):
    pass


def circle_grid(N: int) -> np.ndarray:
    return np.exp(1j * (-np.pi + (np.arange(N) + 0.5) * TWO_PI / N))


def boundary_grid_for(mu: Measure, N: int | None = None) -> np.ndarray:
    """Boundary grid adapted to mu.

    A measure with a density must carry it on a full-circle grid; the model
    grid is then the set of cell midpoints, so f and w are known there.
    """
    require_circle(mu)
    if mu.grid is not None:
        g = mu.grid
        if abs(g.a + np.pi) > 1e-12 or abs(g.b - np.pi) > 1e-12:
            raise ModelError("densities must live on a full-circle grid [-pi, pi]")
        if N is not None and N != g.n:
            raise ModelError("boundary grid size must equal the number of density cells")
        z = np.exp(1j * g.midpoints)
    else:
        z = circle_grid(DEFAULT_GRID if N is None else int(N))
    if mu.n_atoms:
        d = np.abs(z[:, None] - mu.points[None, :]).min()
        if d < 1e-12:
            raise ModelError("an atom sits on a boundary grid point")
    return z


def _check_probability(mu: Measure):
    require_circle(mu)
    if abs(mu.mass - 1.0) > 1e-12:
        raise MeasureError("characteristic functions need a probability measure")


def _check_gamma(gamma) -> complex:
    g = complex(gamma)
    if not abs(g) < 1:
        raise ModelError("|gamma| must be < 1")
    return g


# characteristic function

def theta_routes(mu: Measure, gamma, lam) -> tuple[np.ndarray, np.ndarray]:
    """theta_gamma(lam) through the R1 form and through the R2 form."""
    _check_probability(mu)
    g = _check_gamma(gamma)
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(np.abs(lam) >= 1):
        raise ModelError("theta_from_measure evaluates inside the disc only")
    r1 = cauchy_circle_R1(mu, None, lam)
    r2 = cauchy_circle_R2(mu, None, lam)
    d1 = 1.0 + (1.0 - np.conj(g)) * r1
    d2 = (1.0 - np.conj(g)) * r2 + (1.0 + np.conj(g))
    if np.any(np.abs(d1) < 1e-14) or np.any(np.abs(d2) < 1e-14):
        raise ModelError("vanishing denominator in the characteristic function")
    via_r1 = -g + (1.0 - abs(g) ** 2) * r1 / d1
    via_r2 = ((1.0 - g) * r2 - (1.0 + g)) / d2
    return via_r1, via_r2


def theta_from_measure(mu: Measure, gamma, lam):
    """theta_gamma(lam) = ((1-g) R2 - (1+g)) / ((1-conj g) R2 + (1+conj g))."""
    _, v = theta_routes(mu, gamma, lam)
    return v[0] if np.ndim(lam) == 0 else v


def fractional_relation(theta0, gamma):
    g = complex(gamma)
    t = np.asarray(theta0, dtype=complex)
    den = 1.0 - np.conj(g) * t
    if np.any(np.abs(den) <= 1e-14):
        raise ModelError("1 - conj(gamma) theta0 vanishes")
    return (t - g) / den


def inverse_fractional_relation(theta_gamma, gamma):
    g = complex(gamma)
    t = np.asarray(theta_gamma, dtype=complex)
    den = 1.0 + np.conj(g) * t
    if np.any(np.abs(den) <= 1e-14):
        raise ModelError("1 + conj(gamma) theta_gamma vanishes")
    return (t + g) / den


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((M + np.conj(M).T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ np.conj(v).T


def char_function_from_contraction(T, z, b1=None, b=None):
    """-T + z D_{T*} (I - z T*)^{-1} D_T on the defect space.

    Returns the full matrix, or the scalar (Theta b1, b) when both basis
    vectors are given (orthonormal coordinates).
    """
    T = np.asarray(getattr(T, "matrix", T), dtype=complex)
    n = T.shape[0]
    I = np.eye(n)
    Ts = np.conj(T).T
    DT = _psd_sqrt(I - Ts @ T)
    DTs = _psd_sqrt(I - T @ Ts)
    M = I - complex(z) * Ts
    if np.linalg.cond(M) > 1e14:
        raise ModelError("I - z T* is singular")
    Theta = -T + z * DTs @ np.linalg.solve(M, DT)
    if b1 is None or b is None:
        return Theta
    return complex(np.vdot(b, Theta @ np.asarray(b1, dtype=complex)))


def contraction_theta(mu: Measure, gamma, z) -> complex:
    """Characteristic function of U_gamma from its matrix, in the bases b1, b."""
    op = build_U_param(UnitaryFamily(mu, gamma))
    m = op.source
    b = np.sqrt(m.weights).astype(complex)
    b1 = np.conj(m.points) * b
    return char_function_from_contraction(op.matrix, z, b1, b)


@dataclass(frozen=True)
class CharacteristicFunction:
    mu: Measure
    gamma: complex
    z: np.ndarray

    def __post_init__(self):
        _check_probability(self.mu)
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))

    @property
    def s(self) -> float:
        """(1 - |gamma|^2)^(1/2)."""
        return float(np.sqrt(1.0 - abs(self.gamma) ** 2))

    @property
    def N(self) -> int:
        return int(self.z.size)

    def __call__(self, lam):
        return theta_from_measure(self.mu, self.gamma, lam)

    def theta0_inside(self, lam):
        return theta_from_measure(self.mu, 0.0, lam)

    @cached_property
    def R_boundary(self) -> np.ndarray:
        """Boundary values of R mu from inside the disc, i.e. T_plus 1."""
        return boundary_exact(self.mu, None, PLUS, self.z)

    @cached_property
    def theta0(self) -> np.ndarray:
        return 1.0 - 1.0 / self.R_boundary

    @cached_property
    def theta(self) -> np.ndarray:
        return fractional_relation(self.theta0, self.gamma)

    @cached_property
    def density(self) -> np.ndarray:
        """Density w of mu at the grid points (zero for purely atomic mu)."""
        if self.mu.grid is None:
            return np.zeros(self.N)
        return np.asarray(self.mu.grid.density, dtype=float)

    @cached_property
    def delta0(self) -> np.ndarray:
        # 1 - |theta0|^2 = (2 Re R - 1) / |R|^2 and 2 Re R - 1 = w on the boundary
        return np.sqrt(self.density) / np.abs(self.R_boundary)

    @cached_property
    def delta(self) -> np.ndarray:
        return self.s * self.delta0 / np.abs(1.0 - np.conj(self.gamma) * self.theta0)

    def delta_direct(self) -> np.ndarray:
        """(1 - |theta|^2)^(1/2) straight from the samples of theta."""
        return np.sqrt(np.clip(1.0 - np.abs(self.theta) ** 2, 0.0, None))

    @property
    def theta_at_0(self) -> complex:
        return complex(self(0.0))

    @property
    def inner_score(self) -> float:
        return float(np.max(self.delta))

    @property
    def is_inner(self) -> bool:
        return self.mu.is_atomic


def characteristic_function(mu: Measure, gamma, N: int | None = None) -> CharacteristicFunction:
    return CharacteristicFunction(mu, gamma, boundary_grid_for(mu, N))


# vectors in the two transcriptions

@dataclass(frozen=True)
class ModelVectorSNF:
    g1: np.ndarray
    g2: np.ndarray

    def stack(self) -> np.ndarray:
        return np.vstack([self.g1, self.g2])

    def __sub__(self, other):
        return ModelVectorSNF(self.g1 - other.g1, self.g2 - other.g2)


@dataclass(frozen=True)
class ModelVectorDBR:
    g_plus: np.ndarray
    g_minus: np.ndarray


def model_inner(u: ModelVectorSNF, v: ModelVectorSNF) -> complex:
    return complex(np.mean(u.g1 * np.conj(v.g1) + u.g2 * np.conj(v.g2)))


def model_norm(u: ModelVectorSNF) -> float:
    return float(np.sqrt(np.real(model_inner(u, u))))


def sample_distance(u: ModelVectorSNF, v: ModelVectorSNF, mask=None) -> float:
    """Largest pointwise difference over the grid, optionally on a mask."""
    d = np.abs(u.stack() - v.stack())
    if mask is not None:
        d = d[:, mask]
    return float(d.max()) if d.size else 0.0


def fourier_coefficients(samples) -> tuple[np.ndarray, np.ndarray]:
    """(frequencies k, coefficients a_k) with f(z) = sum a_k z^k on the grid."""
    f = np.asarray(samples, dtype=complex)
    N = f.shape[-1]
    t0 = -np.pi + 0.5 * TWO_PI / N
    k = np.fft.fftfreq(N, d=1.0 / N).astype(int)
    return k, np.fft.fft(f, axis=-1) / N * np.exp(-1j * k * t0)


def _from_coefficients(k: np.ndarray, a: np.ndarray) -> np.ndarray:
    N = k.size
    t0 = -np.pi + 0.5 * TWO_PI / N
    return np.fft.ifft(a * np.exp(1j * k * t0), axis=-1) * N


def h2_split(samples) -> tuple[np.ndarray, np.ndarray]:
    """(P_plus f, P_minus f) from grid samples; the constant term goes to H^2."""
    k, a = fourier_coefficients(samples)
    plus = np.where(k >= 0, a, 0.0)
    return _from_coefficients(k, plus), _from_coefficients(k, a - plus)


def analytic_extension(samples, lam) -> np.ndarray:
    """H^2 part of the grid function, evaluated at points of the closed disc."""
    k, a = fourier_coefficients(samples)
    keep = k >= 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    return np.power.outer(lam, k[keep]) @ a[keep]


def _support_mask(cf: CharacteristicFunction) -> np.ndarray:
    return cf.delta > np.sqrt(MP_CUTOFF)


def snf_project(v, cf: CharacteristicFunction) -> ModelVectorSNF:
    """Orthogonal projection onto K_theta of a two-component grid function.

    P g = (P_+ g1, 1_B g2) - (theta, Delta) P_+(conj(theta) g1 + Delta g2),
    using that multiplication by (theta, Delta) is an isometry of H^2.
    """
    if isinstance(v, ModelVectorSNF):
        g1, g2 = v.g1, v.g2
    else:
        g1, g2 = np.asarray(v[0], complex), np.asarray(v[1], complex)
    B = _support_mask(cf)
    y1 = h2_split(g1)[0]
    y2 = np.where(B, g2, 0.0)
    h = h2_split(np.conj(cf.theta) * y1 + cf.delta * y2)[0]
    return ModelVectorSNF(y1 - cf.theta * h, y2 - cf.delta * h)


def membership_residual(v: ModelVectorSNF, cf: CharacteristicFunction, pointwise: bool = False) -> float:
    """Distance from v to its projection onto K_theta.

    Grid L^2 norm by default; `pointwise` gives the largest sample difference,
    which is only meaningful when v is smooth on the grid scale.
    """
    d = v - snf_project(v, cf)
    if pointwise:
        return float(np.max(np.abs(d.stack())))
    return model_norm(d)


@dataclass(frozen=True)
class DefectVectorsModel:
    c: ModelVectorSNF
    c1: ModelVectorSNF


def defect_vectors_model(cf: CharacteristicFunction) -> DefectVectorsModel:
    t0 = cf.theta_at_0
    k = 1.0 / np.sqrt(1.0 - abs(t0) ** 2)
    z = cf.z
    c = ModelVectorSNF(k * (1.0 - np.conj(t0) * cf.theta), -k * np.conj(t0) * cf.delta)
    c1 = ModelVectorSNF(k * (cf.theta - t0) / z, k * cf.delta / z)
    return DefectVectorsModel(c, c1)


class CompressedShift:
    """The model operator P_theta M_z on K_theta, in two constructions."""

    def __init__(self, cf: CharacteristicFunction):
        self.cf = cf
        self.defect = defect_vectors_model(cf)

    def by_projection(self, v: ModelVectorSNF) -> ModelVectorSNF:
        z = self.cf.z
        return snf_project(ModelVectorSNF(z * v.g1, z * v.g2), self.cf)

    def by_rank_one(self, v: ModelVectorSNF) -> ModelVectorSNF:
        """M_z - z c1 c1^* - theta(0) c c1^*."""
        z = self.cf.z
        c, c1 = self.defect.c, self.defect.c1
        a = model_inner(v, c1)
        t0 = self.cf.theta_at_0
        return ModelVectorSNF(z * v.g1 - a * (z * c1.g1 + t0 * c.g1),
                              z * v.g2 - a * (z * c1.g2 + t0 * c.g2))

    __call__ = by_rank_one


def compressed_shift(cf: CharacteristicFunction) -> CompressedShift:
    return CompressedShift(cf)


def transcription_map(v: ModelVectorSNF, cf: CharacteristicFunction) -> ModelVectorDBR:
    return ModelVectorDBR(v.g1, np.conj(cf.theta) * v.g1 + cf.delta * v.g2)


def inverse_transcription(d: ModelVectorDBR, cf: CharacteristicFunction) -> ModelVectorSNF:
    """Recovers g2 = (g_minus - conj(theta) g_plus) / Delta where Delta > 0, else 0."""
    B = _support_mask(cf)
    num = d.g_minus - np.conj(cf.theta) * d.g_plus
    g2 = np.zeros_like(num)
    g2[B] = num[B] / cf.delta[B]
    return ModelVectorSNF(d.g_plus, g2)


def _pinv_W(theta: np.ndarray) -> np.ndarray:
    W = np.empty(theta.shape + (2, 2), dtype=complex)
    W[..., 0, 0] = 1.0
    W[..., 1, 1] = 1.0
    W[..., 0, 1] = theta
    W[..., 1, 0] = np.conj(theta)
    return np.linalg.pinv(W, rcond=MP_CUTOFF, hermitian=True)


def dbr_norm(d: ModelVectorDBR, cf: CharacteristicFunction) -> float:
    Wp = _pinv_W(cf.theta)
    v = np.stack([d.g_plus, d.g_minus], axis=-1)
    q = np.einsum("ni,nij,nj->n", np.conj(v), Wp, v)
    return float(np.sqrt(np.real(np.mean(q))))


def moore_penrose_residual(cf: CharacteristicFunction) -> float:
    """max over Delta > 0 of |(1, theta; 0, Delta) W^[-1] (1, 0; conj theta, Delta) - I|."""
    th, de = cf.theta, cf.delta
    B = _support_mask(cf)
    if not np.any(B):
        return 0.0
    Wp = _pinv_W(th[B])
    left = np.zeros((B.sum(), 2, 2), dtype=complex)
    left[:, 0, 0] = 1.0
    left[:, 0, 1] = th[B]
    left[:, 1, 1] = de[B]
    right = np.conj(np.transpose(left, (0, 2, 1)))
    prod = left @ Wp @ right
    return float(np.max(np.abs(prod - np.eye(2))))


# inner case: Takenaka-Malmquist coordinates

def takenaka_malmquist(zeros) -> np.ndarray:
    """L[i, j] = phi_j(w_i) for the orthonormal basis of K_B, B the Blaschke product."""
    w = np.asarray(zeros, dtype=complex)
    n = w.size
    L = np.zeros((n, n), dtype=complex)
    prod = np.ones(n, dtype=complex)
    for j in range(n):
        L[:, j] = np.sqrt(1.0 - abs(w[j]) ** 2) / (1.0 - np.conj(w[j]) * w) * prod
        prod = prod * (w - w[j]) / (1.0 - np.conj(w[j]) * w)
    return np.tril(L)


@dataclass(frozen=True)
class InnerModel:
    """K_theta for a finite Blaschke product, in evaluation coordinates at its zeros."""

    zeros: np.ndarray
    L: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.zeros.size)

    def to_orthonormal(self, values) -> np.ndarray:
        return sla.solve_triangular(self.L, np.asarray(values, dtype=complex), lower=True)

    def gram(self, values) -> np.ndarray:
        W = self.to_orthonormal(values)
        return np.conj(W).T @ W

    def shift_matrix(self) -> np.ndarray:
        """Compressed shift in orthonormal coordinates: L^-1 diag(w) L."""
        return self.to_orthonormal(self.zeros[:, None] * self.L)

    def kernel_gram(self) -> np.ndarray:
        """Closed form <k_w_j, k_w_i> = 1 / (1 - conj(w_j) w_i)."""
        w = self.zeros
        return 1.0 / (1.0 - np.conj(w)[None, :] * w[:, None])


def inner_model(mu: Measure, gamma) -> InnerModel:
    """Zeros of theta_gamma are the eigenvalues of U_gamma."""
    if not mu.is_atomic:
        raise ModelError("theta is inner only for purely atomic measures")
    U = build_U_param(UnitaryFamily(mu, gamma)).matrix
    w = np.linalg.eigvals(U)
    w = w[np.lexsort((np.abs(w), np.angle(w)))]
    return InnerModel(w, takenaka_malmquist(w))
