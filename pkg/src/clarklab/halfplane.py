"""Dissipative rank-one perturbations through the Cayley transform.

omega(z) = (z - i) / (z + i) carries R to the circle and the upper half-plane
to the disc.  For a line measure mu with Poisson mass P the circle measure
is mu_T = mu~ o omega^-1 with d mu~ = d mu / (P (1 + x^2)), and

    J f = sqrt(P) f~ o omega^-1,    f~(x) = (x + i) f(x),

is unitary L^2(mu) -> L^2(mu_T).  It sends (A + i)^-1 1 / sqrt(P) to 1 and
(A - i)^-1 1 / sqrt(P) to conj(xi).  On the boundary

    Omega g(x) = g(omega(x)) / (sqrt(pi) (x + i))

is unitary L^2(T, |dz| / 2 pi) -> L^2(R, dx).  Half-plane boundary grids are
omega^-1 of circle grids, so both routes share sample points exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cauchy import PLUS, cauchy_line, radial_limit
from .clark import phi_star_universal
from .measures import CIRCLE, Measure, MeasureError, poisson_mass, require_line
from .model import (ModelError, ModelVectorSNF, characteristic_function, circle_grid,
                    fractional_relation, takenaka_malmquist, theta_from_measure)
from .perturbation import UnitaryFamily, build_U_param

SQRT_PI = float(np.sqrt(np.pi))


class CayleyError(ValueError):
    pass


def cayley(z):
    """omega(z) = (z - i) / (z + i)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == -1j):
        raise CayleyError("omega is undefined at -i")
    return (z - 1j) / (z + 1j)


def cayley_inverse(xi):
    """omega^-1(xi) = i (1 + xi) / (1 - xi)."""
    xi = np.asarray(xi, dtype=complex)
    if np.any(xi == 1):
        raise CayleyError("omega^-1 is undefined at 1")
    return 1j * (1.0 + xi) / (1.0 - xi)


def Q_value(mu: Measure) -> complex:
    """Q = ((A + i)^-1 1, 1) = integral of d mu / (x + i); Im Q = -P."""
    require_line(mu)
    return complex(cauchy_line(mu, None, -1j))


def gamma_of_alpha(mu: Measure, alpha) -> complex:
    """gamma = (1 + alpha conj(Q)) / (1 + alpha Q)."""
    a = complex(alpha)
    if a.imag < 0:
        raise ValueError("alpha must have Im alpha >= 0")
    Q = Q_value(mu)
    den = 1.0 + a * Q
    if den == 0:
        raise CayleyError("1 + alpha Q vanishes")
    return (1.0 + a * np.conj(Q)) / den


def _atomic_line(mu: Measure) -> Measure:
    require_line(mu)
    if mu.grid is not None and np.any(mu.grid.density > 0):
        raise ModelError("the pushforward to the circle is implemented for atomic measures")
    return mu


def pushforward_to_circle(mu: Measure) -> Measure:
    """Atoms t -> omega(t) with weights m / (P (1 + t^2)); total mass 1."""
    mu = _atomic_line(mu)
    P = poisson_mass(mu)
    if P <= 0:
        raise MeasureError("Poisson mass must be positive")
    t = mu.positions
    w = mu.weights / (P * (1.0 + t ** 2))
    return Measure(CIRCLE, np.angle(cayley(t)), w, None, "pushforward")


def circle_order(mu: Measure) -> np.ndarray:
    """perm with atom j of the pushforward the image of atom perm[j] of mu.

    Circle measures keep their atoms sorted by angle, which reverses and
    rotates the order on the line.
    """
    return np.argsort(np.angle(cayley(mu.positions)), kind="stable")


def transfer(mu: Measure, f) -> np.ndarray:
    """J f as samples on the atoms of the pushforward, in its order."""
    P = poisson_mass(mu)
    perm = circle_order(mu)
    return (np.sqrt(P) * (mu.positions + 1j) * np.asarray(f, dtype=complex))[perm]


def transfer_back(mu: Measure, g) -> np.ndarray:
    P = poisson_mass(mu)
    out = np.empty(mu.dim, dtype=complex)
    out[circle_order(mu)] = np.asarray(g, dtype=complex)
    return out / (np.sqrt(P) * (mu.positions + 1j))


@dataclass(frozen=True)
class CayleyBridge:
    alpha: complex
    gamma: complex
    Q: complex
    P: float
    mu_line: Measure
    mu_circle: Measure

    @property
    def in_disc(self) -> bool:
        # real alpha gives |gamma| = 1 up to roundoff; the sign of Im alpha decides
        return self.alpha.imag > 0


def cayley_bridge(mu: Measure, alpha) -> CayleyBridge:
    mu = _atomic_line(mu)
    return CayleyBridge(complex(alpha), gamma_of_alpha(mu, alpha), Q_value(mu),
                        poisson_mass(mu), mu, pushforward_to_circle(mu))


# half-plane Cauchy transforms

def _tilde(mu: Measure, f) -> np.ndarray:
    if f is None:
        return np.ones(mu.dim, dtype=complex)
    return np.asarray(f, dtype=complex)


def _kernel_sum(mu: Measure, h, w, second) -> np.ndarray:
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    s = mu.positions[None, :]
    K = 1.0 / (s - w[:, None]) - second(s)
    return K @ (mu.weights * h)


def _check_upper(w):
    if np.any(np.imag(np.atleast_1d(w)) <= 0):
        raise ValueError("half-plane transforms need Im w > 0")


def halfplane_R(mu: Measure, f, w):
    """(1 / 2iP) integral of f(s) [1/(s - w) - 1/(s + i)] d mu(s) = R(J-side f) mu_T(omega(w))."""
    mu = _atomic_line(mu)
    _check_upper(w)
    P = poisson_mass(mu)
    out = _kernel_sum(mu, _tilde(mu, f), w, lambda s: 1.0 / (s + 1j)) / (2j * P)
    return out[0] if np.ndim(w) == 0 else out


def halfplane_R1(mu: Measure, f, w):
    """(1 / 2iP) integral of f(s) [1/(s - w) - 1/(s - i)] d mu(s)."""
    mu = _atomic_line(mu)
    _check_upper(w)
    P = poisson_mass(mu)
    out = _kernel_sum(mu, _tilde(mu, f), w, lambda s: 1.0 / (s - 1j)) / (2j * P)
    return out[0] if np.ndim(w) == 0 else out


def halfplane_R2(mu: Measure, f, w):
    """(1 / iP) integral of f(s) [1/(s - w) - s/(s^2 + 1)] d mu(s)."""
    mu = _atomic_line(mu)
    _check_upper(w)
    P = poisson_mass(mu)
    out = _kernel_sum(mu, _tilde(mu, f), w, lambda s: s / (s ** 2 + 1.0)) / (1j * P)
    return out[0] if np.ndim(w) == 0 else out


def circle_transforms_at(mu: Measure, f, w) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """R, R1, R2 of the pushforward at omega(w), for f a function on the atoms of mu."""
    from .cauchy import cauchy_circle_R, cauchy_circle_R1, cauchy_circle_R2
    muT = pushforward_to_circle(mu)
    lam = cayley(np.atleast_1d(w))
    h = None if f is None else np.asarray(f, dtype=complex)[circle_order(mu)]
    return (cauchy_circle_R(muT, h, lam), cauchy_circle_R1(muT, h, lam),
            cauchy_circle_R2(muT, h, lam))


def theta_halfplane(mu: Measure, gamma, w):
    """theta~_gamma(w) = -g + (1 - |g|^2) R~1 / (1 + (1 - conj g) R~1), mu Poisson normalized."""
    mu = _atomic_line(mu)
    P = poisson_mass(mu)
    if abs(P - 1.0) > 1e-12:
        raise MeasureError("theta_halfplane needs a Poisson normalized measure")
    g = complex(gamma)
    r1 = halfplane_R1(mu, None, np.atleast_1d(w))
    out = -g + (1.0 - abs(g) ** 2) * r1 / (1.0 + (1.0 - np.conj(g)) * r1)
    return out[0] if np.ndim(w) == 0 else out


def theta_halfplane_circle(mu: Measure, gamma, w):
    """theta_gamma of the pushforward composed with omega."""
    out = theta_from_measure(pushforward_to_circle(mu), gamma, cayley(np.atleast_1d(w)))
    return out[0] if np.ndim(w) == 0 else out


# Cayley transform of the dissipative family

def cayley_matrix(mu: Measure, alpha) -> np.ndarray:
    """(A_alpha - i)(A_alpha + i)^-1 with A_alpha = diag(t) + alpha (., 1) 1, orthonormal coordinates."""
    mu = _atomic_line(mu)
    s = np.sqrt(mu.weights)
    A = np.diag(mu.positions).astype(complex) + complex(alpha) * np.outer(s, s)
    I = np.eye(mu.dim)
    return np.linalg.solve((A + 1j * I).T, (A - 1j * I).T).T


def cayley_rank_one(mu: Measure, alpha) -> np.ndarray:
    """U~ + (gamma - 1) b~ b~1^* with b~ = (A + i)^-1 1 / sqrt(P), b~1 = (A - i)^-1 1 / sqrt(P)."""
    mu = _atomic_line(mu)
    t = mu.positions
    s = np.sqrt(mu.weights)
    P = poisson_mass(mu)
    b = s / (t + 1j) / np.sqrt(P)
    b1 = s / (t - 1j) / np.sqrt(P)
    g = gamma_of_alpha(mu, alpha)
    return np.diag(cayley(t)) + (g - 1.0) * np.outer(b, np.conj(b1))


def cayley_identity_residual(mu: Measure, alpha) -> float:
    return float(np.linalg.norm(cayley_matrix(mu, alpha) - cayley_rank_one(mu, alpha)))


def conjugation_residual(mu: Measure, alpha) -> float:
    """|| J T_alpha J^-1 - U_gamma(mu_T) ||_F, J diagonal in orthonormal coordinates."""
    mu = _atomic_line(mu)
    T = cayley_matrix(mu, alpha)
    t = mu.positions
    # orthonormal coordinates: the same atoms in the same order, so J is the phase (t + i) / |t + i|
    d = (t + 1j) / np.abs(t + 1j)
    perm = circle_order(mu)
    JTJ = (d[:, None] * T / d[None, :])[np.ix_(perm, perm)]
    U = build_U_param(UnitaryFamily(pushforward_to_circle(mu), gamma_of_alpha(mu, alpha))).matrix
    return float(np.linalg.norm(JTJ - U))


# half-plane Clark operator

def halfplane_grid(N: int) -> np.ndarray:
    return np.real(cayley_inverse(circle_grid(N)))


@dataclass(frozen=True)
class HalfplaneVector:
    x: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    def stack(self) -> np.ndarray:
        return np.vstack([self.g1, self.g2])

    def to_circle(self) -> ModelVectorSNF:
        k = SQRT_PI * (self.x + 1j)
        return ModelVectorSNF(k * self.g1, k * self.g2)


def halfplane_inner(u: HalfplaneVector, v: HalfplaneVector) -> complex:
    """Integral over R of u conj(v) dx, as a mean over the circle grid."""
    w = np.pi * np.abs(u.x + 1j) ** 2
    return complex(np.mean(w * (u.g1 * np.conj(v.g1) + u.g2 * np.conj(v.g2))))


def _theta0_boundary(mu: Measure, x) -> tuple[np.ndarray, np.ndarray]:
    # T~_+ 1 at real x off the atoms, then theta~_0 = 1 - 1 / T~_+ 1
    P = poisson_mass(mu)
    T1 = _kernel_sum(mu, np.ones(mu.dim), x, lambda s: 1.0 / (s + 1j)) / (2j * P)
    return T1, 1.0 - 1.0 / T1


def _coefficients(gamma: complex, theta0: np.ndarray):
    g = complex(gamma)
    s = np.sqrt(1.0 - abs(g) ** 2)
    den = 1.0 - np.conj(g) * theta0
    # atomic mu: theta~ is inner and Delta~ vanishes identically; sqrt(1 - |theta|^2)
    # would only return roundoff at the 1e-8 level
    d0 = np.zeros(theta0.shape)
    A = (s / den, np.conj(g) * d0 / np.abs(den))
    B = (s * (1.0 - theta0) / den, (np.conj(g) - 1.0) * d0 / np.abs(den))
    return A, B


def _check_gamma(gamma):
    if not abs(complex(gamma)) < 1:
        raise ModelError("|gamma| must be < 1")


def phi_star_halfplane_universal(mu: Measure, gamma, f, N: int = 1024) -> HalfplaneVector:
    """sqrt(pi)(z + i) Phi~^* f = sqrt(P) [A~ f~(z) + B~ integral (f~(s) - f~(z)) (1/2iP)[1/(s-z) - 1/(s+i)] dmu].

    mu atomic, so f~(z) = 0 at grid points and its coefficient A~ - B~ T~_+ 1 vanishes anyway.
    """
    mu = _atomic_line(mu)
    _check_gamma(gamma)
    x = halfplane_grid(N)
    P = poisson_mass(mu)
    ft = (mu.positions + 1j) * np.asarray(f, dtype=complex)
    _, t0 = _theta0_boundary(mu, x)
    A, B = _coefficients(gamma, t0)
    I = _kernel_sum(mu, ft, x, lambda s: 1.0 / (s + 1j)) / (2j * P)
    k = np.sqrt(P) / (SQRT_PI * (x + 1j))
    return HalfplaneVector(x, k * B[0] * I, k * B[1] * I)


def phi_star_halfplane_circle(mu: Measure, gamma, f, N: int = 1024) -> HalfplaneVector:
    """Omega Phi_gamma^* J f through the circle machinery."""
    mu = _atomic_line(mu)
    _check_gamma(gamma)
    muT = pushforward_to_circle(mu)
    cf = characteristic_function(muT, gamma, N)
    v = phi_star_universal(transfer(mu, f), cf)
    x = np.real(cayley_inverse(cf.z))
    k = 1.0 / (SQRT_PI * (x + 1j))
    return HalfplaneVector(x, k * v.g1, k * v.g2)


def phi_star_halfplane_snf(mu: Measure, gamma, f, N: int = 1024, rtol: float = 1e-10
                           ) -> tuple[HalfplaneVector, np.ndarray]:
    """SNF form with T~_+ from limits w = z + i delta, delta -> 0.

    s sqrt(pi)(z + i) Phi~^* f = sqrt(P) [(0, (conj g - (conj g - 1) T1) Delta~) f~(z)
                                          + ((1 + conj g theta~) / T1, (conj g - 1) Delta~) T f~]
    Returns the vector and the excluded grid indices.
    """
    mu = _atomic_line(mu)
    _check_gamma(gamma)
    g = complex(gamma)
    s = np.sqrt(1.0 - abs(g) ** 2)
    x = halfplane_grid(N)
    P = poisson_mass(mu)
    ft = (mu.positions + 1j) * np.asarray(f, dtype=complex)

    def lim(h):
        def ev(w):
            return _kernel_sum(mu, h, w, lambda t: 1.0 / (t + 1j)) / (2j * P)
        return radial_limit(ev, x.astype(complex), PLUS, False, rtol=rtol, delta0=0.125, kmax=40)

    T1, c1 = lim(np.ones(mu.dim, dtype=complex))
    Tf, c2 = lim(ft)
    bad = ~(c1 & c2) | (np.abs(T1) < 1e-10)
    T1 = np.where(bad, 1.0, T1)
    theta = fractional_relation(1.0 - 1.0 / T1, g)
    delta = np.zeros(theta.shape)
    gc = np.conj(g)
    # atomic mu: f~(z) = 0 on the grid
    top = (1.0 + gc * theta) / T1 * Tf
    bot = (gc - 1.0) * delta * Tf
    k = np.sqrt(P) / (s * SQRT_PI * (x + 1j))
    top, bot = np.where(bad, 0.0, k * top), np.where(bad, 0.0, k * bot)
    return HalfplaneVector(x, top, bot), np.flatnonzero(bad)


def halfplane_gram(mu: Measure, gamma) -> np.ndarray:
    """Gram matrix of Phi~^* e_k, e_k the orthonormal atom basis of L^2(mu).

    Top components at w_j = omega^-1(zeros of theta_gamma) come from the
    half-plane transforms; Omega and the Takenaka-Malmquist basis of K_theta
    turn them into orthonormal coordinates.
    """
    from .model import inner_model
    mu = _atomic_line(mu)
    _check_gamma(gamma)
    g = complex(gamma)
    s = np.sqrt(1.0 - abs(g) ** 2)
    model = inner_model(pushforward_to_circle(mu), g)
    w = cayley_inverse(model.zeros)
    P = poisson_mass(mu)
    R1 = halfplane_R(mu, None, w)
    den = (1.0 - np.conj(g)) * R1 + np.conj(g)
    cols = []
    for k in range(mu.dim):
        e = np.zeros(mu.dim, dtype=complex)
        e[k] = 1.0 / np.sqrt(mu.weights[k])
        cols.append(s * np.sqrt(P) * halfplane_R(mu, (mu.positions + 1j) * e, w) / den)
    W = np.linalg.solve(takenaka_malmquist(model.zeros), np.column_stack(cols))
    return np.conj(W).T @ W


@dataclass(frozen=True)
class DissipativeReport:
    alpha: complex
    gamma: complex
    Q: complex
    P: float
    residuals: dict


def route_residuals(mu: Measure, alpha, N: int = 1024, seed: int = 0) -> DissipativeReport:
    """All half-plane dual-route checks for one (mu, alpha) with Im alpha > 0."""
    br = cayley_bridge(mu, alpha)
    res = {"cayley_identity": cayley_identity_residual(mu, alpha),
           "cayley_conjugation": conjugation_residual(mu, alpha)}
    rng = np.random.default_rng(seed)
    w = rng.normal(size=8) + 1j * rng.uniform(0.1, 2.0, size=8)
    f = rng.normal(size=mu.dim) + 1j * rng.normal(size=mu.dim)
    R = halfplane_R(mu, f, w), halfplane_R1(mu, f, w), halfplane_R2(mu, f, w)
    C = circle_transforms_at(mu, f, w)
    res["transfer_R"] = float(np.max(np.abs(R[0] - C[0])))
    res["transfer_R1"] = float(np.max(np.abs(R[1] - C[1])))
    res["transfer_R2"] = float(np.max(np.abs(R[2] - C[2])))
    if br.in_disc:
        mun = mu.scaled(1.0 / br.P)
        res["theta"] = float(np.max(np.abs(theta_halfplane(mun, br.gamma, w)
                                           - theta_halfplane_circle(mun, br.gamma, w))))
        u = phi_star_halfplane_universal(mu, br.gamma, f, N)
        c = phi_star_halfplane_circle(mu, br.gamma, f, N)
        sn, _ = phi_star_halfplane_snf(mu, br.gamma, f, N)
        res["phi_universal_circle"] = _scaled_distance(u, c)
        res["phi_universal_snf"] = _scaled_distance(u, sn)
        res["general_P_scaling"] = scaling_residual(mu, alpha, f, N)
        G = halfplane_gram(mu, br.gamma)
        res["gram"] = float(np.max(np.abs(G - np.eye(G.shape[0]))))
    return DissipativeReport(br.alpha, br.gamma, br.Q, br.P, res)


def _scaled_distance(u: HalfplaneVector, v: HalfplaneVector) -> float:
    """Largest difference of sqrt(pi)(x + i) times the vectors (the circle samples)."""
    a, b = u.to_circle(), v.to_circle()
    return float(np.max(np.abs(a.stack() - b.stack())))


def scaling_residual(mu: Measure, alpha, f, N: int = 512) -> float:
    """Results for mu against mu / P with f -> sqrt(P) f and alpha -> alpha P.

    The map f -> sqrt(P) f is unitary L^2(mu) -> L^2(mu / P), and it carries
    the perturbation alpha (., 1) 1 to (alpha P)(., 1) 1.
    """
    P = poisson_mass(mu)
    mun = mu.scaled(1.0 / P)
    g = gamma_of_alpha(mu, alpha)
    gn = gamma_of_alpha(mun, complex(alpha) * P)
    out = abs(g - gn)
    if complex(alpha).imag > 0:
        f = np.asarray(f, dtype=complex)
        u = phi_star_halfplane_universal(mu, g, f, N)
        v = phi_star_halfplane_universal(mun, gn, np.sqrt(P) * f, N)
        out = max(out, _scaled_distance(u, v))
    return float(out)
