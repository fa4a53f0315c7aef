"""Spectral representation operators L^2(mu) -> L^2(mu_alpha) as explicit matrices.

Line:   V f(s) = f(s) - alpha * integral (f(s) - f(t)) / (s - t) dmu(t)
Circle: V f(z) = f(z) + (1 - alpha) * integral (f(xi) - f(z)) / (1 - conj(xi) z) dmu(xi)

For atomic measures the supports of mu and mu_alpha are disjoint, so the
basis indicators of mu vanish at every atom of mu_alpha and the difference
quotient kernel is never singular.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cauchy import MINUS, PLUS, boundary_values
from .measures import CIRCLE, LINE, Measure, OperatorMatrix, require_circle, require_line


class SupportCollisionError(ValueError):
    pass


class RepresentationError(ValueError):
    pass


FORMULA = "formula"
ALTERNATIVE_T = "alternative_T"
RIGIDITY = "rigidity"


@dataclass(frozen=True)
class RepresentationOperator:
    matrix: OperatorMatrix
    alpha: complex
    construction: str = FORMULA
    info: dict = field(default_factory=dict)

    @property
    def array(self) -> np.ndarray:
        return self.matrix.matrix


def _atomic(mu: Measure) -> Measure:
    return mu if mu.grid is None else mu.lumped()


def _same_support(mu: Measure, nu: Measure) -> bool:
    return mu.n_atoms == nu.n_atoms and np.array_equal(mu.positions, nu.positions)


def _check_disjoint(mu: Measure, nu: Measure):
    d = np.abs(nu.points[:, None] - mu.points[None, :])
    if d.size and d.min() == 0:
        raise SupportCollisionError(
            "an atom of the target measure coincides with an atom of mu; the "
            "atoms of a perturbed spectral measure interlace strictly with those "
            "of mu, so the pair is not a perturbation pair")


def line_formula_matrix(mu: Measure, nu: Measure, alpha: float) -> np.ndarray:
    """Difference-quotient formula evaluated at the atoms of nu, in orthonormal coordinates."""
    _check_disjoint(mu, nu)
    s, t = nu.positions[:, None], mu.positions[None, :]
    return alpha * np.sqrt(nu.weights)[:, None] * np.sqrt(mu.weights)[None, :] / (s - t)


def circle_formula_matrix(mu: Measure, nu: Measure, alpha: complex) -> np.ndarray:
    _check_disjoint(mu, nu)
    k = 1.0 / (1.0 - np.conj(mu.points)[None, :] * nu.points[:, None])
    return (1.0 - alpha) * np.sqrt(nu.weights)[:, None] * k * np.sqrt(mu.weights)[None, :]


def build_V_alpha(mu: Measure, mu_alpha: Measure, alpha: float) -> RepresentationOperator:
    require_line(mu)
    require_line(mu_alpha)
    m, ma = _atomic(mu), _atomic(mu_alpha)
    disc = m is not mu or ma is not mu_alpha
    if alpha == 0:
        if not _same_support(m, ma):
            raise RepresentationError("alpha = 0 needs mu_alpha = mu")
        M = np.eye(m.dim, dtype=complex)
    else:
        M = line_formula_matrix(m, ma, alpha).astype(complex)
    return RepresentationOperator(OperatorMatrix(M, m, ma, disc), alpha, FORMULA)


def build_V_gamma_circle(mu: Measure, mu_alpha: Measure, alpha: complex) -> RepresentationOperator:
    require_circle(mu)
    require_circle(mu_alpha)
    alpha = complex(alpha)
    if abs(abs(alpha) - 1.0) > 1e-12:
        raise ValueError("Clark parameter must be unimodular")
    m, ma = _atomic(mu), _atomic(mu_alpha)
    disc = m is not mu or ma is not mu_alpha
    if alpha == 1:
        if not _same_support(m, ma):
            raise RepresentationError("alpha = 1 needs mu_alpha = mu")
        M = np.eye(m.dim, dtype=complex)
    else:
        M = circle_formula_matrix(m, ma, alpha)
    return RepresentationOperator(OperatorMatrix(M, m, ma, disc), alpha, FORMULA)


def _nearest_extension(mu: Measure, nu: Measure) -> np.ndarray:
    """Matrix of f -> f(nearest atom of mu), evaluated at the atoms of nu, in coordinates."""
    d = np.abs(nu.points[:, None] - mu.points[None, :])
    E = np.zeros((nu.dim, mu.dim))
    j = np.argmin(d, axis=1)
    E[np.arange(nu.dim), j] = np.sqrt(nu.weights) / np.sqrt(mu.weights[j])
    return E


def alternative_representation(mu: Measure, mu_alpha: Measure, alpha, side: str = PLUS,
                               rtol: float = 1e-10) -> RepresentationOperator:
    """Same operator through boundary values of Cauchy integrals.

    Line:   V f = f (1 - alpha T 1) + alpha T f
    Circle: V f = [1 - (1 - alpha) T 1] f + (1 - alpha) T f
    with T = T_plus or T_minus evaluated at the atoms of mu_alpha.  The first
    term needs f at points outside supp mu; we extend f from the nearest atom.
    Its coefficient vanishes at the atoms of mu_alpha, which the returned
    info records.
    """
    if side not in (PLUS, MINUS):
        raise ValueError("side must be 'plus' or 'minus'")
    m, ma = _atomic(mu), _atomic(mu_alpha)
    if m.support != ma.support:
        raise ValueError("measures live on different supports")
    _check_disjoint(m, ma)
    circle = m.support == CIRCLE
    coef = (1.0 - complex(alpha)) if circle else float(alpha)
    pts = ma.points
    T1 = boundary_values(m, None, side, pts, rtol=rtol)
    cols = [T1]
    for j in range(m.dim):
        e = np.zeros(m.dim, dtype=complex)
        e[j] = 1.0 / np.sqrt(m.weights[j])
        cols.append(boundary_values(m, e, side, pts, rtol=rtol))
    bad = np.zeros(pts.size, dtype=bool)
    for c in cols:
        bad |= ~c.converged_flags
    if np.any(bad):
        raise RepresentationError(
            f"boundary values did not converge at {int(bad.sum())} atoms: {pts[bad]}")
    mult = 1.0 - coef * T1.values
    Tf = np.column_stack([c.values for c in cols[1:]])
    M = mult[:, None] * _nearest_extension(m, ma) + coef * np.sqrt(ma.weights)[:, None] * Tf
    info = {"max_extension_coefficient": float(np.max(np.abs(mult)))}
    disc = m is not mu or ma is not mu_alpha
    return RepresentationOperator(OperatorMatrix(M, m, ma, disc), alpha, ALTERNATIVE_T, info)


@dataclass(frozen=True)
class RigidityResult:
    h: np.ndarray
    mu_alpha: Measure
    orthogonality_defect: float


def rigidity_reconstruct(mu: Measure, nu: Measure, alpha, V_matrix=None,
                         orth_tol: float = 1e-8) -> RigidityResult:
    """Find the positive weight h making M_h V unitary, and the measure |h|^2 nu.

    `V_matrix` maps L^2(mu) into L^2(nu) in orthonormal coordinates; when it
    is omitted the difference-quotient formula is evaluated on nu.  If
    M_d V = W is unitary then V V^* = diag(d)^-2, so d is one over the row
    norms of V; the rows of (V^-1)^* have norms d, which is checked too.
    """
    m, n = _atomic(mu), _atomic(nu)
    if m.dim < 2:
        raise RepresentationError("mu must be supported on at least two distinct points")
    if V_matrix is None:
        if m.support == LINE:
            V = line_formula_matrix(m, n, alpha)
        else:
            V = circle_formula_matrix(m, n, alpha)
    else:
        V = np.asarray(getattr(V_matrix, "matrix", V_matrix), dtype=complex)
    if V.shape != (n.dim, m.dim):
        raise ValueError("V has the wrong shape for L^2(mu) -> L^2(nu)")
    sv = np.linalg.svd(V, compute_uv=False)
    if sv.size == 0 or sv[-1] <= 1e-10:
        raise RepresentationError("V is singular; no renormalization exists")
    rows = np.linalg.norm(V, axis=1)
    d = 1.0 / rows
    W = d[:, None] * V
    G = W @ np.conj(W).T
    defect = float(np.max(np.abs(G - np.eye(G.shape[0]))))
    if defect > orth_tol:
        raise RepresentationError(
            f"not a renormalizable representation: row orthogonality defect {defect:.3e}")
    dual = np.linalg.norm(np.linalg.inv(V).conj().T, axis=1)
    rel = float(np.max(np.abs(dual - d) / d))
    if rel > orth_tol:
        raise RepresentationError(f"inverse row norms disagree with 1/|rows| ({rel:.3e})")
    # the atoms of nu get weights d^2 nu
    ma = Measure(n.support, n.positions, d ** 2 * n.weights, None, "reconstructed")
    return RigidityResult(d, ma, defect)


def bilinear_form(mu: Measure, mu_alpha: Measure, alpha: float, f, g) -> complex:
    """alpha * double integral of f(t) conj(g(s)) / (s - t) dmu(t) dmu_alpha(s).

    For atomic perturbation pairs this equals (V f, g) exactly.
    """
    m, ma = _atomic(mu), _atomic(mu_alpha)
    _check_disjoint(m, ma)
    K = 1.0 / (ma.positions[:, None] - m.positions[None, :])
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    return complex(alpha * np.sum(np.conj(g * ma.weights)[:, None] * K * (f * m.weights)[None, :]))


def unitarity_residuals(M: np.ndarray) -> tuple[float, float]:
    n, k = M.shape
    return (float(np.linalg.norm(np.conj(M).T @ M - np.eye(k))),
            float(np.linalg.norm(M @ np.conj(M).T - np.eye(n))))


def intertwining_residual(V: np.ndarray, op: np.ndarray, target_points) -> float:
    """|| V op - M V ||_F with M multiplication by the target atoms."""
    return float(np.linalg.norm(V @ op - np.asarray(target_points)[:, None] * V))


def normalization_residual(rep: RepresentationOperator) -> float:
    """max |V 1 - 1| in orthonormal coordinates."""
    M = rep.matrix
    one_src = np.sqrt(M.source.weights)
    one_tgt = np.sqrt(M.target.weights)
    return float(np.max(np.abs(M.matrix @ one_src - one_tgt)))
