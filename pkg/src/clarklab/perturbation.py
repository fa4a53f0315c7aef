"""Rank-one perturbation families A_alpha, U_alpha and U_gamma as matrices.

The cyclic vector is the constant function 1.  In the orthonormal basis
e_k = m_k^{-1/2} 1_{atom k} it becomes the vector sqrt(m).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .cauchy import AnalyticField, PoleError, cauchy_line
from .measures import (CIRCLE, LINE, Measure, MeasureError, OperatorMatrix, require_circle,
                       require_line, wrap_angle)


class SingularPerturbationError(ValueError):
    pass


class EigenvalueHitError(ValueError):
    pass


@dataclass(frozen=True)
class SelfAdjointFamily:
    base_measure: Measure
    alpha: float

    def __post_init__(self):
        require_line(self.base_measure)
        if np.iscomplexobj(self.alpha) and np.imag(self.alpha) != 0:
            raise ValueError("self-adjoint family needs a real alpha")
        object.__setattr__(self, "alpha", float(np.real(self.alpha)))


@dataclass(frozen=True)
class UnitaryFamily:
    """U + (param - 1)(., U* b) b with b = 1; |param| = 1 unitary, < 1 contractive."""

    base_measure: Measure
    param: complex

    def __post_init__(self):
        require_circle(self.base_measure)
        p = complex(self.param)
        if abs(p) > 1 + 1e-12:
            raise ValueError("|param| must not exceed 1")
        if abs(self.base_measure.mass - 1.0) > 1e-12:
            raise MeasureError("circle spectral measures must have total mass 1")
        object.__setattr__(self, "param", p)

    @property
    def is_unitary(self) -> bool:
        return abs(abs(self.param) - 1.0) <= 1e-12


@dataclass(frozen=True)
class DefectData:
    defect_norm_factor: float
    b: np.ndarray
    b1: np.ndarray
    measure: Measure

    def defect_operator(self) -> np.ndarray:
        """(1 - |gamma|^2) b1 b1^* in orthonormal coordinates."""
        v = self.measure.to_coords(self.b1)
        return self.defect_norm_factor ** 2 * np.outer(v, np.conj(v))


def rank_one_inverse(a, b, weights=None) -> np.ndarray:
    """Matrix of (I - (., b) a)^{-1} = I + d^{-1} (., b) a.

    The inner product is (u, v) = sum u conj(v) w, linear in the first slot,
    which makes the determinant d = 1 - (a, b).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    w = np.ones(a.size) if weights is None else np.asarray(weights, dtype=float)
    d = 1.0 - np.sum(a * np.conj(b) * w)
    if abs(d) < 1e-14:
        raise SingularPerturbationError("perturbation determinant vanishes")
    return np.eye(a.size, dtype=complex) + np.outer(a, np.conj(b) * w) / d


def rank_one_operator(a, b, weights=None) -> np.ndarray:
    """Matrix of I - (., b) a."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    w = np.ones(a.size) if weights is None else np.asarray(weights, dtype=float)
    return np.eye(a.size, dtype=complex) - np.outer(a, np.conj(b) * w)


def _atomic(mu: Measure) -> tuple[Measure, bool]:
    if mu.is_atomic:
        return (mu if mu.grid is None else mu.lumped()), False
    return mu.lumped(), True


def build_A_alpha(fam: SelfAdjointFamily) -> OperatorMatrix:
    mu, disc = _atomic(fam.base_measure)
    s = np.sqrt(mu.weights)
    A = np.diag(mu.positions).astype(complex) + fam.alpha * np.outer(s, s)
    return OperatorMatrix(A, mu, mu, disc)


def build_U_param(fam: UnitaryFamily) -> OperatorMatrix:
    mu, disc = _atomic(fam.base_measure)
    s = np.sqrt(mu.weights)
    xi = mu.points
    U = np.diag(xi) + (fam.param - 1.0) * np.outer(s, np.conj(np.conj(xi) * s))
    return OperatorMatrix(U, mu, mu, disc)


def resolvent_perturbed(fam: SelfAdjointFamily, f, lam) -> np.ndarray:
    """(A_alpha - lam)^{-1} f as a sample vector, through the rank-one formula."""
    mu, _ = _atomic(fam.base_measure)
    f = np.asarray(f, dtype=complex)
    if f.size != mu.dim:
        f = _restrict(fam.base_measure, f)
    lam = complex(lam)
    diff = mu.positions - lam
    if np.any(diff == 0):
        raise PoleError("lambda is an eigenvalue of the unperturbed operator")
    rf = f / diff
    rphi = 1.0 / diff
    F = np.sum(mu.weights * rphi)
    den = 1.0 + fam.alpha * F
    if abs(den) < 1e-14 * max(1.0, abs(fam.alpha * F)):
        raise EigenvalueHitError("1 + alpha F(lambda) vanishes")
    return rf - fam.alpha * np.sum(rf * mu.weights) / den * rphi


def _restrict(mu: Measure, f: np.ndarray) -> np.ndarray:
    # sample vector of the full measure to the lumped (positive mass) samples
    keep = np.concatenate([np.ones(mu.n_atoms, bool), mu.grid.density > 0])
    return f[keep]


def aronszajn_krein(F_values: AnalyticField, alpha) -> AnalyticField:
    F = np.asarray(F_values.values, dtype=complex)
    den = 1.0 + alpha * F
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("1 + alpha F vanishes at an evaluation point")
    return AnalyticField(F_values.eval_points, F / den, F_values.side)


def F_field(mu: Measure, lam) -> AnalyticField:
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    return AnalyticField(lam, cauchy_line(mu, None, lam))


def _eig_measure_line(A: np.ndarray, phi: np.ndarray, label: str) -> Measure:
    vals, vecs = np.linalg.eigh(A)
    w = np.abs(np.conj(vecs).T @ phi) ** 2
    keep = w > 0
    return Measure(LINE, vals[keep], w[keep], None, label)


def _eig_measure_circle(U: np.ndarray, phi: np.ndarray, label: str) -> Measure:
    T, Z = sla.schur(U, output="complex")
    # a normal matrix has a diagonal Schur form with unitary Z
    vals = np.diag(T)
    if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-10:
        raise ValueError("matrix is not unitary")
    w = np.abs(np.conj(Z).T @ phi) ** 2
    keep = w > 0
    return Measure(CIRCLE, np.angle(vals[keep]), w[keep], None, label)


def spectral_measure_perturbed(fam) -> Measure:
    """Spectral measure of the perturbed matrix with respect to the vector 1."""
    if isinstance(fam, SelfAdjointFamily):
        op = build_A_alpha(fam)
        phi = np.sqrt(op.source.weights).astype(complex)
        return _eig_measure_line(op.matrix, phi, f"mu_alpha (alpha={fam.alpha:g})")
    if not fam.is_unitary:
        raise ValueError("spectral measures are defined for |param| = 1 only")
    mu, _ = _atomic(fam.base_measure)
    if np.all(mu.weights > 0):
        return clark_measure_secular(mu, fam.param)
    op = build_U_param(fam)
    phi = np.sqrt(op.source.weights).astype(complex)
    return _eig_measure_circle(op.matrix, phi, "clark measure")


def clark_measure_secular(mu: Measure, gamma: complex) -> Measure:
    """Eigenvalues and weights of U_gamma from its secular equation.

    For gamma = exp(i phi) the eigenvalues exp(it) solve
        sum_k m_k cot((theta_k - t) / 2) = -cot(phi / 2),
    which is increasing in t between consecutive atoms, so each gap holds
    exactly one root.  Weights are 1 / (|1 - gamma|^2 sum_k m_k / |xi_k - z|^2).
    A Schur decomposition loses accuracy for eigenvalues close to atoms; the
    bracketed root solve does not.
    """
    require_circle(mu)
    gamma = complex(gamma)
    if abs(gamma - 1.0) < 1e-15:
        return Measure(CIRCLE, mu.positions, mu.weights, None, "clark measure")
    th, m = mu.positions, mu.weights
    target = -1.0 / np.tan(np.angle(gamma) / 2)
    n = th.size
    t = np.empty(n)
    w = np.empty(n)
    two_pi = 2 * np.pi
    for k in range(n):
        d = np.mod(th - th[k], two_pi)
        d[k] = 0.0
        gap = two_pi if n == 1 else (d[(k + 1) % n] if k + 1 < n else np.mod(th[0] - th[k], two_pi))
        g = lambda u: np.sum(m / np.tan((d - u) / 2)) - target
        u = brentq(g, gap * 1e-13, gap * (1 - 1e-13), xtol=1e-300, rtol=1e-15, maxiter=500)
        t[k] = th[k] + u
        w[k] = 1.0 / (abs(1 - gamma) ** 2 * np.sum(m / (4 * np.sin((d - u) / 2) ** 2)))
    return Measure(CIRCLE, wrap_angle(t), w, None, "clark measure")


def unitary_eigenvalues(fam: UnitaryFamily) -> np.ndarray:
    T, _ = sla.schur(build_U_param(fam).matrix, output="complex")
    return np.diag(T)


def secular_weights(mu: Measure, alpha: float, eigenvalues) -> np.ndarray:
    """Weights of mu_alpha at its atoms: 1 / (alpha^2 sum m_k / (t_k - s)^2)."""
    s = np.asarray(eigenvalues, dtype=float)
    d = mu.positions[None, :] - s[:, None]
    return 1.0 / (alpha ** 2 * np.sum(mu.weights[None, :] / d ** 2, axis=1))


def defect_data(fam: UnitaryFamily) -> DefectData:
    mu = fam.base_measure
    factor = float(np.sqrt(max(0.0, 1.0 - abs(fam.param) ** 2)))
    b = mu.ones()
    b1 = np.conj(mu.sample_points)
    return DefectData(factor, b, b1, mu if mu.grid is None else mu)


def defect_residual(fam: UnitaryFamily) -> float:
    """Frobenius norm of (I - U^*U) - (1 - |gamma|^2) b1 b1^*."""
    op = build_U_param(fam)
    U = op.matrix
    v = np.conj(op.source.points) * np.sqrt(op.source.weights)
    lhs = np.eye(U.shape[0]) - np.conj(U).T @ U
    rhs = (1.0 - abs(fam.param) ** 2) * np.outer(v, np.conj(v))
    return float(np.linalg.norm(lhs - rhs))


def unitarity_residual(U: np.ndarray) -> float:
    return float(np.linalg.norm(np.conj(U).T @ U - np.eye(U.shape[0])))


def krylov_cyclic(A: np.ndarray, phi: np.ndarray, tol: float = 1e-10) -> tuple[bool, int]:
    """Arnoldi with reorthogonalization; cyclic iff no breakdown before dim steps."""
    n = A.shape[0]
    Q = np.zeros((n, n), dtype=complex)
    q = np.asarray(phi, dtype=complex)
    nrm = np.linalg.norm(q)
    if nrm == 0:
        return False, 0
    Q[:, 0] = q / nrm
    scale = max(1.0, np.linalg.norm(A, 2))
    for k in range(1, n):
        v = A @ Q[:, k - 1]
        for _ in range(2):
            v = v - Q[:, :k] @ (np.conj(Q[:, :k]).T @ v)
        h = np.linalg.norm(v)
        if h <= tol * scale:
            return False, k
        Q[:, k] = v / h
    return True, n


@dataclass(frozen=True)
class InterlacingReport:
    degenerate: bool
    interlaced: bool
    min_gap: float


def interlacing_report(atoms, eigenvalues, alpha: float, scale: float = 1.0,
                       gap_tol: float = 1e-10) -> InterlacingReport:
    """Strict alternation t_1 < s_1 < t_2 < ... (alpha > 0) or s_1 < t_1 < ... (alpha < 0)."""
    t = np.sort(np.asarray(atoms, dtype=float))
    s = np.sort(np.asarray(eigenvalues, dtype=float))
    if t.size != s.size:
        return InterlacingReport(False, False, 0.0)
    gap = float(np.min(np.abs(t[:, None] - s[None, :]))) if t.size else np.inf
    if gap < gap_tol * scale:
        return InterlacingReport(True, False, gap)
    seq = np.empty(2 * t.size)
    if alpha > 0:
        seq[0::2], seq[1::2] = t, s
    else:
        seq[0::2], seq[1::2] = s, t
    return InterlacingReport(False, bool(np.all(np.diff(seq) > 0)), gap)


def circle_interlacing(atom_angles, eigen_angles) -> bool:
    """Atoms and eigenvalues alternate around the circle."""
    a = wrap_angle(np.asarray(atom_angles))
    e = wrap_angle(np.asarray(eigen_angles))
    if a.size != e.size:
        return False
    labels = np.concatenate([np.zeros(a.size), np.ones(e.size)])
    order = np.argsort(np.concatenate([a, e]), kind="stable")
    seq = labels[order]
    return bool(np.all(seq[1:] != seq[:-1]) and seq[0] != seq[-1])
