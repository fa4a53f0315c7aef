"""The Clark operator Phi_gamma: K_theta -> L^2(mu) and its adjoint.

Three routes to Phi_gamma^* f on the boundary grid:

* universal: A f(z) + B integral (f(xi) - f(z)) / (1 - conj(xi) z) dmu(xi),
  with A = c and B = c - z c1, the integral done in closed form per cell;
* snf: the same operator through boundary values T_plus f, T_plus 1;
* dbr: g_plus, g_minus through T_plus and T_minus, then back to (g1, g2).

Here s = (1 - |gamma|^2)^(1/2) throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .cauchy import MINUS, PLUS, _rows, boundary_values, cauchy_circle_R, radial_limit
from .measures import Measure
from .model import (CharacteristicFunction, InnerModel, ModelError, ModelVectorDBR,
                    ModelVectorSNF, analytic_extension, defect_vectors_model, inner_model,
                    inverse_transcription, transcription_map)
from .perturbation import UnitaryFamily, build_U_param
from .representation import build_V_gamma_circle

DIVISION_CUTOFF = 1e-10


@dataclass(frozen=True)
class RouteResult:
    vector: ModelVectorSNF
    excluded: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _fz(cf: CharacteristicFunction, f) -> np.ndarray:
    """f at the grid points: the cell value where mu has density, else 0.

    Off the density support f(z) only meets coefficients that vanish there.
    """
    f = np.asarray(f, dtype=complex)
    mu = cf.mu
    if mu.grid is None:
        return np.zeros(cf.N, dtype=complex)
    cells = f[mu.n_atoms:]
    return np.where(mu.grid.density > 0, cells, 0.0)


def difference_integral(mu: Measure, f, z: np.ndarray, fz: np.ndarray) -> np.ndarray:
    """Integral of (f(xi) - f(z)) / (1 - conj(xi) z) dmu(xi) for z on the model grid.

    The cell containing z contributes nothing because f is constant there.
    """
    f = np.asarray(f, dtype=complex)
    out = np.empty(z.size, dtype=complex)
    na = mu.n_atoms
    for k in range(0, z.size, 256):
        zz = z[k:k + 256]
        K = _rows(mu, zz, PLUS)
        if mu.grid is not None:
            own = np.arange(k, k + zz.size)
            K[np.arange(zz.size), na + own] = 0.0
        out[k:k + 256] = K @ f - fz[k:k + 256] * K.sum(axis=1)
    return out


@dataclass(frozen=True)
class ABCoefficients:
    A: ModelVectorSNF
    B: ModelVectorSNF
    A_theta0: ModelVectorSNF
    B_theta0: ModelVectorSNF

    @property
    def agreement(self) -> float:
        d = [np.abs(self.A.stack() - self.A_theta0.stack()),
             np.abs(self.B.stack() - self.B_theta0.stack())]
        return float(max(x.max() for x in d))


def A_B_coefficients(cf: CharacteristicFunction) -> ABCoefficients:
    """A = c, B = c - z c1, from the defect vectors and from theta0 directly."""
    dv = defect_vectors_model(cf)
    z = cf.z
    A = dv.c
    B = ModelVectorSNF(dv.c.g1 - z * dv.c1.g1, dv.c.g2 - z * dv.c1.g2)
    g, s = cf.gamma, cf.s
    t0, d0 = cf.theta0, cf.delta0
    den = 1.0 - np.conj(g) * t0
    A0 = ModelVectorSNF(s / den, np.conj(g) * d0 / np.abs(den))
    B0 = ModelVectorSNF(s * (1.0 - t0) / den, (np.conj(g) - 1.0) * d0 / np.abs(den))
    return ABCoefficients(A, B, A0, B0)


def phi_star_universal(f, cf: CharacteristicFunction) -> ModelVectorSNF:
    f = np.asarray(f, dtype=complex)
    if f.size != cf.mu.dim:
        raise ValueError("f must be a sample vector of mu")
    ab = A_B_coefficients(cf)
    fz = _fz(cf, f)
    I = difference_integral(cf.mu, f, cf.z, fz)
    return ModelVectorSNF(ab.A.g1 * fz + ab.B.g1 * I, ab.A.g2 * fz + ab.B.g2 * I)


def trivial_clark(f, cf: CharacteristicFunction) -> ModelVectorSNF:
    """gamma = 0, mu Lebesgue: theta = 0 and Phi^* f = (P_+ f, P_- f)."""
    f = np.asarray(f, dtype=complex)
    fz = _fz(cf, f)
    plus = fz + difference_integral(cf.mu, f, cf.z, fz)
    return ModelVectorSNF(plus, fz - plus)


def _boundary(mu, f, side, z, rtol):
    bv = boundary_values(mu, f, side, z, rtol=rtol)
    return bv.values, bv.converged_flags


def phi_star_snf(f, cf: CharacteristicFunction, rtol: float = 1e-10,
                 tplus=None) -> RouteResult:
    """s Phi^* f = (0, (conj g - (conj g - 1) T1) Delta) f + ((1 + conj g theta) / T1, (conj g - 1) Delta) T f.

    T = T_plus from radial boundary values.  Grid points where |T_plus 1|
    is below the cutoff or the radial limit failed are excluded (set to 0).
    """
    f = np.asarray(f, dtype=complex)
    g, s = cf.gamma, cf.s
    if tplus is None:
        T1, c1 = _boundary(cf.mu, None, PLUS, cf.z, rtol)
        Tf, c2 = _boundary(cf.mu, f, PLUS, cf.z, rtol)
    else:
        (T1, c1), (Tf, c2) = tplus
    bad = ~(c1 & c2) | (np.abs(T1) < DIVISION_CUTOFF)
    T1s = np.where(bad, 1.0, T1)
    fz = _fz(cf, f)
    gc = np.conj(g)
    top = (1.0 + gc * cf.theta) / T1s * Tf
    bot = (gc - (gc - 1.0) * T1s) * cf.delta * fz + (gc - 1.0) * cf.delta * Tf
    top, bot = np.where(bad, 0.0, top / s), np.where(bad, 0.0, bot / s)
    return RouteResult(ModelVectorSNF(top, bot), np.flatnonzero(bad))


def phi_star_snf_theta0(f, cf: CharacteristicFunction, rtol: float = 1e-10,
                        tplus=None) -> RouteResult:
    """The same operator with coefficients written through theta0 and Delta0."""
    f = np.asarray(f, dtype=complex)
    g, s = cf.gamma, cf.s
    if tplus is None:
        T1, c1 = _boundary(cf.mu, None, PLUS, cf.z, rtol)
        Tf, c2 = _boundary(cf.mu, f, PLUS, cf.z, rtol)
    else:
        (T1, c1), (Tf, c2) = tplus
    bad = ~(c1 & c2) | (np.abs(T1) < DIVISION_CUTOFF)
    T1s = np.where(bad, 1.0, T1)
    fz = _fz(cf, f)
    den = 1.0 - np.conj(g) * cf.theta0
    top = (1.0 - abs(g) ** 2) / den / T1s * Tf
    bot = s * den / np.abs(den) * T1s * cf.delta0 * fz \
        + (np.conj(g) - 1.0) * s / np.abs(den) * cf.delta0 * Tf
    top, bot = np.where(bad, 0.0, top / s), np.where(bad, 0.0, bot / s)
    return RouteResult(ModelVectorSNF(top, bot), np.flatnonzero(bad))


@dataclass(frozen=True)
class DBRResult:
    vector: ModelVectorDBR
    excluded: np.ndarray
    g_minus_alt: np.ndarray | None = None
    fallback: bool = False


def _is_lebesgue(cf: CharacteristicFunction) -> bool:
    return cf.mu.n_atoms == 0 and float(np.max(np.abs(cf.theta0))) < 1e-12


def dbr_components(f, cf: CharacteristicFunction, rtol: float = 1e-10) -> DBRResult:
    """g_plus = s / (1 - conj g theta0) T_+ f / T_+ 1,  g_minus = s conj(theta0) / (1 - g conj theta0) T_- f / T_- 1.

    For the Lebesgue measure T_- 1 = 0 and the pair comes from the
    universal route instead.
    """
    f = np.asarray(f, dtype=complex)
    if _is_lebesgue(cf):
        v = phi_star_universal(f, cf)
        return DBRResult(transcription_map(v, cf), np.zeros(0, dtype=int), None, True)
    g, s = cf.gamma, cf.s
    z = cf.z
    Tp1, a = _boundary(cf.mu, None, PLUS, z, rtol)
    Tpf, b = _boundary(cf.mu, f, PLUS, z, rtol)
    Tm1, c = _boundary(cf.mu, None, MINUS, z, rtol)
    Tmf, d = _boundary(cf.mu, f, MINUS, z, rtol)
    bad = ~(a & b & c & d) | (np.abs(Tp1) < DIVISION_CUTOFF) | (np.abs(Tm1) < DIVISION_CUTOFF)
    Tp1 = np.where(bad, 1.0, Tp1)
    Tm1 = np.where(bad, 1.0, Tm1)
    t0 = cf.theta0
    gp = s / (1.0 - np.conj(g) * t0) * Tpf / Tp1
    gm = s * np.conj(t0) / (1.0 - g * np.conj(t0)) * Tmf / Tm1
    gm_alt = (np.conj(cf.theta) + np.conj(g)) / s * Tmf / Tm1
    gp, gm, gm_alt = (np.where(bad, 0.0, x) for x in (gp, gm, gm_alt))
    return DBRResult(ModelVectorDBR(gp, gm), np.flatnonzero(bad), gm_alt, False)


@dataclass(frozen=True)
class TripleAgreement:
    universal: ModelVectorSNF
    snf: ModelVectorSNF
    dbr: ModelVectorSNF
    excluded: np.ndarray
    residuals: dict


def clark_routes(f, cf: CharacteristicFunction, rtol: float = 1e-10) -> TripleAgreement:
    """All three routes on the same f, with pairwise max differences over usable points."""
    u = phi_star_universal(f, cf)
    sn = phi_star_snf(f, cf, rtol)
    db = dbr_components(f, cf, rtol)
    d = inverse_transcription(db.vector, cf)
    keep = np.ones(cf.N, dtype=bool)
    keep[sn.excluded] = False
    keep[db.excluded] = False

    def dist(a, b):
        x = np.abs(a.stack() - b.stack())[:, keep]
        return float(x.max()) if x.size else 0.0

    res = {"universal_snf": dist(u, sn.vector), "universal_dbr": dist(u, d),
           "snf_dbr": dist(sn.vector, d)}
    return TripleAgreement(u, sn.vector, d, np.flatnonzero(~keep), res)


# inner case: exact matrices in evaluation coordinates

@dataclass(frozen=True)
class ClarkInner:
    values: np.ndarray      # values[j, k] = top component of Phi^* e_k at zero w_j
    model: InnerModel
    U: np.ndarray

    @property
    def orthonormal(self) -> np.ndarray:
        return self.model.to_orthonormal(self.values)

    def gram_residual(self) -> float:
        W = self.orthonormal
        return float(np.max(np.abs(np.conj(W).T @ W - np.eye(W.shape[1]))))

    def intertwining_residual(self) -> float:
        """|| Phi^* U_gamma - M_theta Phi^* || in orthonormal coordinates."""
        W = self.orthonormal
        S = self.model.shift_matrix()
        return float(np.linalg.norm(W @ self.U - S @ W, 2))

    def evaluation_intertwining(self) -> float:
        V = self.values
        return float(np.linalg.norm(V @ self.U - self.model.zeros[:, None] * V, 2))

    def inverse(self, values_at_zeros) -> np.ndarray:
        """Phi applied to the model vector with the given values: orthonormal coordinates of f."""
        return np.linalg.solve(self.values, np.asarray(values_at_zeros, dtype=complex))


def top_inside(mu: Measure, gamma, f, lam) -> np.ndarray:
    """Analytic top component s R f mu / ((1 - conj g) R mu + conj g) inside the disc."""
    g = complex(gamma)
    s = np.sqrt(1.0 - abs(g) ** 2)
    Rf = cauchy_circle_R(mu, f, lam)
    R = cauchy_circle_R(mu, None, lam)
    return s * Rf / ((1.0 - np.conj(g)) * R + np.conj(g))


def clark_inner(mu: Measure, gamma) -> ClarkInner:
    model = inner_model(mu, gamma)
    w = model.zeros
    g = complex(gamma)
    s = np.sqrt(1.0 - abs(g) ** 2)
    m = mu.weights
    xi = mu.points
    R = (m[None, :] / (1.0 - np.conj(xi)[None, :] * w[:, None])).sum(axis=1)
    den = (1.0 - np.conj(g)) * R + np.conj(g)
    V = s * (np.sqrt(m)[None, :] / (1.0 - np.conj(xi)[None, :] * w[:, None])) / den[:, None]
    U = build_U_param(UnitaryFamily(mu, g)).matrix
    return ClarkInner(V, model, U)


# forward operator

@dataclass(frozen=True)
class ForwardResult:
    f: np.ndarray
    f_s: np.ndarray
    f_a: np.ndarray
    converged: np.ndarray
    excluded_cells: np.ndarray
    atom_method: str = "radial"


def _local_atom_values(samples, cf: CharacteristicFunction, points, npts: int = 12,
                       rtol: float = 1e-8):
    """Values at atoms from a local polynomial through nearby grid samples.

    Only valid where g_plus is analytic across the atom, i.e. the nearby
    cells carry no density.  Two stencil sizes give the convergence flag.
    """
    out = np.zeros(len(points), dtype=complex)
    ok = np.zeros(len(points), dtype=bool)
    w = cf.density
    for k, p in enumerate(points):
        d = np.angle(cf.z * np.conj(p))
        idx = np.argsort(np.abs(d))[:npts]
        if np.any(w[idx] > 0):
            continue
        x = d[idx] / np.max(np.abs(d[idx]))
        hi = BarycentricInterpolator(x, samples[idx])(0.0)
        sub = idx[:npts - 2]
        lo = BarycentricInterpolator(d[sub] / np.max(np.abs(d[idx])), samples[sub])(0.0)
        out[k] = hi
        ok[k] = abs(hi - lo) <= rtol * max(1.0, abs(hi))
    return out, ok


def phi_forward(g: ModelVectorDBR, cf: CharacteristicFunction, w_cutoff: float = 1e-10,
                rtol: float = 1e-10, atom_method: str = "auto") -> ForwardResult:
    """f = Phi_gamma g.

    Singular part: boundary values at the atoms of (1 - conj g) / s times
    g_plus.  `radial` takes radial limits of the analytic extension built
    from the Fourier coefficients of the samples (exact up to aliasing when
    mu is atomic); `local` interpolates the samples next to the atom, which
    needs a zero-density arc around it.  `auto` picks radial for atomic mu.
    Absolutely continuous part:
    s w f_a = (1 - conj g theta0)/(1 - theta0) g_plus + (1 - g conj theta0)/(1 - conj theta0) g_minus.
    """
    mu = cf.mu
    gam, s = cf.gamma, cf.s
    if atom_method == "auto":
        atom_method = "radial" if mu.grid is None else "local"
    if atom_method not in ("radial", "local"):
        raise ValueError("atom_method must be 'radial', 'local' or 'auto'")
    fs = np.zeros(mu.n_atoms, dtype=complex)
    conv = np.ones(mu.n_atoms, dtype=bool)
    scale = (1.0 - np.conj(gam)) / s
    if mu.n_atoms and atom_method == "radial":
        def ev(lam):
            return scale * analytic_extension(g.g_plus, lam)

        fs, conv = radial_limit(ev, mu.points, PLUS, True, rtol=rtol, delta0=0.125, kmax=30)
    elif mu.n_atoms:
        fs, conv = _local_atom_values(scale * np.asarray(g.g_plus), cf, mu.points)
    fa = np.zeros(mu.n_cells, dtype=complex)
    excl = np.zeros(0, dtype=int)
    if mu.grid is not None:
        w = mu.grid.density
        t0 = cf.theta0
        rhs = (1.0 - np.conj(gam) * t0) / (1.0 - t0) * g.g_plus \
            + (1.0 - gam * np.conj(t0)) / (1.0 - np.conj(t0)) * g.g_minus
        ok = w > w_cutoff
        fa[ok] = rhs[ok] / (s * w[ok])
        excl = np.flatnonzero((w > 0) & ~ok)
    return ForwardResult(np.concatenate([fs, fa]), fs, fa, conv, excl, atom_method)


def round_trip_error(f, cf: CharacteristicFunction, atom_method: str = "auto") -> float:
    """|| Phi Phi^* f - f || / || f || in L^2(mu)."""
    v = phi_star_universal(f, cf)
    back = phi_forward(transcription_map(v, cf), cf, atom_method=atom_method)
    f = np.asarray(f, dtype=complex)
    return cf.mu.norm(back.f - f) / cf.mu.norm(f)


def normalized_cauchy_at_atoms(mu: Measure, f, rtol: float = 1e-10):
    """Radial limits of R f mu / R mu at the atoms of mu, with convergence flags."""
    def ev(lam):
        return cauchy_circle_R(mu, f, lam) / cauchy_circle_R(mu, None, lam)
    return radial_limit(ev, mu.points, PLUS, True, rtol=rtol)


# other Clark parameters

def _same_measure(a: Measure, b: Measure) -> bool:
    if a.n_atoms != b.n_atoms or not np.array_equal(a.positions, b.positions):
        return False
    if not np.allclose(a.weights, b.weights, rtol=0, atol=1e-14):
        return False
    if (a.grid is None) != (b.grid is None):
        return False
    if a.grid is None:
        return True
    return (a.grid.a == b.grid.a and a.grid.b == b.grid.b
            and np.allclose(a.grid.density, b.grid.density, rtol=0, atol=1e-12))


def V_alpha_adjoint(f, mu: Measure, mu_alpha: Measure, alpha) -> np.ndarray:
    """Samples on mu of V_alpha^* f for f sampled on mu_alpha.

    Atomic pairs use the matrix; when mu_alpha = mu (the Lebesgue measure is
    its own Clark measure) V_alpha^* is the difference-quotient formula with
    base mu_alpha and parameter conj(alpha).
    """
    f = np.asarray(f, dtype=complex)
    a = complex(alpha)
    if mu.is_atomic and mu_alpha.is_atomic:
        V = build_V_gamma_circle(mu, mu_alpha, a).array
        coords = np.conj(V).T @ mu_alpha.to_coords(f)
        return mu.from_coords(coords)
    if _same_measure(mu, mu_alpha):
        if mu.n_atoms:
            raise ModelError("V_alpha^* on a mixed measure is not supported")
        z = np.exp(1j * mu.grid.midpoints)
        fz = np.where(mu.grid.density > 0, f, 0.0)
        return f + (1.0 - np.conj(a)) * difference_integral(mu, f, z, fz)
    raise ModelError("composition route needs an atomic pair or mu_alpha = mu")


def phi_star_alpha_composition(f, alpha, cf: CharacteristicFunction,
                               mu_alpha: Measure) -> ModelVectorSNF:
    return phi_star_universal(V_alpha_adjoint(f, cf.mu, mu_alpha, alpha), cf)


def phi_star_alpha(f, alpha, cf: CharacteristicFunction, mu_alpha: Measure,
                   rtol: float = 1e-10, second_form: bool = False) -> RouteResult:
    """Phi_{alpha,gamma}^* f for f in L^2(mu_alpha), landing in K_theta_gamma.

    s Phi^* f = (0, (conj g - (conj g - conj a) T1) Delta) f + ((1 + conj g theta) / T1, (conj g - conj a) Delta) T f
    with T = T_plus with respect to mu_alpha.  The second form writes the
    bottom f coefficient as s conj(a) (1 - conj g theta0) / |1 - conj g theta0| T1 Delta0.
    """
    f = np.asarray(f, dtype=complex)
    a = complex(alpha)
    g, s = cf.gamma, cf.s
    T1, c1 = _boundary(mu_alpha, None, PLUS, cf.z, rtol)
    Tf, c2 = _boundary(mu_alpha, f, PLUS, cf.z, rtol)
    bad = ~(c1 & c2) | (np.abs(T1) < DIVISION_CUTOFF)
    T1s = np.where(bad, 1.0, T1)
    if mu_alpha.grid is None:
        fz = np.zeros(cf.N, dtype=complex)
    else:
        fz = np.where(mu_alpha.grid.density > 0, f[mu_alpha.n_atoms:], 0.0)
    gc, ac = np.conj(g), np.conj(a)
    top = (1.0 + gc * cf.theta) / T1s * Tf
    if second_form:
        den = 1.0 - gc * cf.theta0
        fcoef = s * ac * den / np.abs(den) * T1s * cf.delta0
    else:
        fcoef = (gc - (gc - ac) * T1s) * cf.delta
    bot = fcoef * fz + (gc - ac) * cf.delta * Tf
    top, bot = np.where(bad, 0.0, top / s), np.where(bad, 0.0, bot / s)
    return RouteResult(ModelVectorSNF(top, bot), np.flatnonzero(bad))


def clark_alpha_inner(mu: Measure, mu_alpha: Measure, alpha, gamma) -> np.ndarray:
    """Values at the zeros of theta_gamma of Phi_{alpha,gamma}^* e_k, e_k the basis of L^2(mu_alpha).

    Top component inside the disc: (1 + conj g theta_gamma) / s * R f mu_alpha / R mu_alpha,
    and theta_gamma vanishes at the zeros.
    """
    model = inner_model(mu, gamma)
    w = model.zeros
    s = np.sqrt(1.0 - abs(complex(gamma)) ** 2)
    p = mu_alpha.weights
    K = 1.0 / (1.0 - np.conj(mu_alpha.points)[None, :] * w[:, None])
    R = (p[None, :] * K).sum(axis=1)
    return (np.sqrt(p)[None, :] * K) / R[:, None] / s


def grid_resolution(mu: Measure, gamma, N: int) -> float:
    """N (1 - max |zero of theta_gamma|) for atomic mu.

    Grid samples of K_theta vectors alias like max|w|^(N/2); values above
    about 60 keep that below 1e-13.
    """
    if not mu.is_atomic:
        return np.inf
    w = inner_model(mu, gamma).zeros
    return float(N * (1.0 - np.max(np.abs(w))))


def choose_grid(mu: Measure, gamma, target: float = 80.0, n_min: int = 256,
                n_max: int = 16384) -> int:
    """Smallest power-of-two grid with grid_resolution >= target (atomic mu)."""
    if mu.grid is not None:
        return mu.grid.n
    N = n_min
    while N < n_max and grid_resolution(mu, gamma, N) < target:
        N *= 2
    return N
