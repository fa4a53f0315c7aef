"""Singular integral kernels: restricted bounds, regularizations, Schur multipliers.

A kernel K(x, y) acts from L^2(mu) to L^2(nu) through the bilinear form
sum K(s, t) f(t) conj(g(s)) mu_t nu_s with s running over nu and t over mu.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cauchy import smooth_cutoff
from .measures import CIRCLE, Measure, MeasureError


class SeparationError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    evaluator: Callable
    dimension: int = 1
    name: str = "custom"
    # closed forms for regularizations that also make sense on the diagonal
    regularized: dict = field(default_factory=dict)
    circle: bool = False

    def __call__(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        same = x == y
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(self.evaluator(np.where(same, x + 1.0, x), y), dtype=complex)
        return np.where(same, 0.0, v)


def _hilbert(x, y):
    return 1.0 / (x - y)


def hilbert_kernel() -> KernelSpec:
    def cauchy(eps, sign=-1):
        # 1/(x - y) times the multiplier (x-y)/(x-y-i eps sign)
        return lambda x, y: 1.0 / (np.asarray(x) - np.asarray(y) - 1j * eps * sign)
    return KernelSpec(_hilbert, 1, "hilbert", {"cauchy": cauchy})


def cauchy_circle_kernel() -> KernelSpec:
    def radial(r):
        return lambda z, xi: 1.0 / (1.0 - r * np.conj(xi) * z)
    return KernelSpec(lambda z, xi: 1.0 / (1.0 - np.conj(xi) * z), 1, "cauchy_circle",
                      {"radial": radial}, circle=True)


def planar_cauchy_kernel() -> KernelSpec:
    return KernelSpec(lambda z, w: 1.0 / (z - w), 2, "cauchy_plane")


def beurling_kernel() -> KernelSpec:
    return KernelSpec(lambda z, w: 1.0 / (z - w) ** 2, 2, "beurling")


def riesz_kernel() -> KernelSpec:
    """First planar Riesz kernel (x1 - y1) / |x - y|^2, points as complex numbers."""
    return KernelSpec(lambda z, w: np.real(z - w) / np.abs(z - w) ** 2, 2, "riesz")


def rank_one_kernel(a: Callable, b: Callable) -> KernelSpec:
    return KernelSpec(lambda x, y: a(x) * b(y), 1, "rank_one")


def zero_kernel() -> KernelSpec:
    return KernelSpec(lambda x, y: np.zeros(np.broadcast(x, y).shape), 1, "zero")


NAMED_KERNELS = {
    "hilbert": hilbert_kernel,
    "cauchy_line": hilbert_kernel,
    "cauchy_circle": cauchy_circle_kernel,
    "riesz": riesz_kernel,
    "beurling": beurling_kernel,
    "cauchy_plane": planar_cauchy_kernel,
}


# Schur multipliers given by Fourier transforms of finite complex measures

@dataclass(frozen=True)
class SchurMultiplierSpec:
    """M(x, y) = sigma_hat((x - y) / scale), sigma = sum w_k delta_{a_k}."""

    positions: np.ndarray
    weights: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).reshape(-1))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=complex).reshape(-1))
        if self.positions.shape != self.weights.shape:
            raise ValueError("positions and weights differ in length")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def symbol(self, u):
        u = np.asarray(u, dtype=float) / self.scale
        return np.tensordot(np.exp(-1j * np.multiply.outer(u, self.positions)),
                            self.weights, axes=([-1], [0]))

    def __call__(self, x, y):
        return self.symbol(np.real(np.asarray(x) - np.asarray(y)))

    def dilated(self, eps: float) -> "SchurMultiplierSpec":
        return SchurMultiplierSpec(self.positions, self.weights, self.scale * eps)


def schur_apply(K: KernelSpec, M: SchurMultiplierSpec) -> KernelSpec:
    return KernelSpec(lambda x, y: K.evaluator(x, y) * M(x, y), K.dimension,
                      f"{K.name}*schur", circle=K.circle)


# Cauchy-type multipliers

@dataclass(frozen=True)
class CauchyLineMultiplier:
    """m_eps(s) = s / (s - i eps sign); turns 1/(x - y) into 1/(x - y - i eps sign).

    m = delta_0 - rho_hat with rho(x) = e^{-x} on [0, inf), so the total
    variation of the underlying measure, and the Schur bound, is 2.
    """

    eps: float
    sign: int = 1
    schur_bound: float = 2.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return s / (s - 1j * self.eps * self.sign)

    def kernel(self, x, y):
        return 1.0 / (np.asarray(x) - np.asarray(y) - 1j * self.eps * self.sign)


def cauchy_multiplier_line(eps: float, sign: int = 1) -> CauchyLineMultiplier:
    return CauchyLineMultiplier(float(eps), int(sign))


@dataclass(frozen=True)
class CauchyCircleMultiplier:
    """m(u) = (1 - u) / (1 - r u) at u = conj(xi) z.

    Its Fourier coefficients are 1, r^n - r^(n-1) (n >= 1) for r < 1, and
    1/r, r^-(k+1) - r^-k at u^-k for r > 1; their l1 sum is 2 and 2/r.
    """

    r: float
    schur_bound: float = 2.0

    def __post_init__(self):
        if self.r < 0 or self.r == 1:
            raise ValueError("r must be nonnegative and different from 1")

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        return (1.0 - u) / (1.0 - self.r * u)

    def kernel(self, z, xi):
        return 1.0 / (1.0 - self.r * np.conj(xi) * z)

    def coefficients(self, nmax: int) -> tuple[np.ndarray, np.ndarray]:
        """(frequencies, coefficients) of the expansion truncated at |n| <= nmax."""
        r = self.r
        k = np.arange(1, nmax + 1)
        if r < 1:
            freq = np.concatenate([[0], k])
            coef = np.concatenate([[1.0], r ** k - r ** (k - 1)])
        else:
            freq = np.concatenate([[0], -k])
            coef = np.concatenate([[1.0 / r], r ** (-k - 1.0) - r ** (-k * 1.0)])
        return freq, coef

    def coefficient_l1(self) -> float:
        return 2.0 if self.r < 1 else 2.0 / self.r


def cauchy_multiplier_circle(r: float) -> CauchyCircleMultiplier:
    return CauchyCircleMultiplier(float(r))


# restricted boundedness

def _kernel_matrix(K: KernelSpec, mu: Measure, nu: Measure) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m, n = mu.lumped(), nu.lumped()
    if K.circle or m.support == CIRCLE:
        xs, ys = n.points, m.points
    else:
        xs, ys = n.positions, m.positions
    Kmat = np.asarray(K(xs[:, None], ys[None, :]), dtype=complex)
    Kmat = np.broadcast_to(Kmat, (n.dim, m.dim)).copy()
    return Kmat, m.weights, n.weights


def _distance(mu: Measure, nu: Measure) -> np.ndarray:
    return np.abs(nu.lumped().points[:, None] - mu.lumped().points[None, :])


@dataclass(frozen=True)
class RestrictedBound:
    lower: float
    upper: float
    p: float
    trials: int
    best_split: Optional[tuple] = None


def _separation(mu: Measure, nu: Measure) -> float:
    pts = np.concatenate([mu.lumped().points, nu.lumped().points])
    u = np.unique(np.round(pts, 15))
    if u.size < 2:
        raise SeparationError("supports cannot be separated: a single point in total")
    if mu.grid is not None or nu.grid is not None:
        widths = [g.width for g in (mu.grid, nu.grid) if g is not None]
        return float(min(widths))
    d = np.abs(u[:, None] - u[None, :])
    return 0.5 * float(d[d > 0].min())


def _coord(pts: np.ndarray, circle: bool) -> np.ndarray:
    return np.angle(pts) if circle else pts.real


def _random_split(rng, mu_pts, nu_pts, sep, circle):
    """Random interleaved blocks; f lives on mu in 'f' blocks, g on nu in 'g' blocks."""
    cm, cn = _coord(mu_pts, circle), _coord(nu_pts, circle)
    allc = np.concatenate([cm, cn])
    lo, hi = allc.min(), allc.max()
    nb = int(rng.integers(2, 9))
    cuts = np.sort(rng.uniform(lo, hi, nb - 1))
    labels = rng.integers(0, 2, nb)
    if labels.min() == labels.max():
        labels[rng.integers(nb)] ^= 1
    fm = labels[np.searchsorted(cuts, cm)] == 0
    gm = labels[np.searchsorted(cuts, cn)] == 1
    d = np.abs(nu_pts[:, None] - mu_pts[None, :])
    # drop points of f closer than sep to the g set, then the other way round
    close = (d < sep) & gm[:, None] & fm[None, :]
    fm &= ~close.any(axis=0)
    close = (d < sep) & gm[:, None] & fm[None, :]
    gm &= ~close.any(axis=1)
    return fm, gm


def _holder_ascent(B, mw, nw, p, rng, iters=200, tol=1e-12):
    """Maximize |g^* diag(nw) B diag(mw) f| / (||f||_{p,mu} ||g||_{p',nu})."""
    q = p / (p - 1.0)

    def normalize(v, w, r):
        n = (np.sum(np.abs(v) ** r * w)) ** (1.0 / r)
        return v / n if n > 0 else v

    def dual(c, w, r):
        # maximizer of |sum v c w| over ||v||_{r,w} = 1
        rr = r / (r - 1.0)
        v = np.abs(c) ** (rr - 1.0) * np.exp(-1j * np.angle(c))
        return normalize(v, w, r)

    f = normalize(rng.normal(size=B.shape[1]) + 1j * rng.normal(size=B.shape[1]), mw, p)
    best = 0.0
    for _ in range(iters):
        c = np.conj((nw[:, None] * B * mw[None, :]) @ f)
        g = dual(c, nw, q)
        cf = (np.conj(g) * nw) @ B * mw
        f = dual(cf, mw, p)
        val = abs(np.conj(g) @ (nw[:, None] * B * mw[None, :]) @ f)
        if val <= best * (1 + tol):
            best = max(best, val)
            break
        best = val
    return best


def _schur_test_bound(Kmat, mw, nw, p):
    A = np.abs(Kmat)
    c1 = float(np.max(A @ mw)) if A.size else 0.0
    c2 = float(np.max(nw @ A)) if A.size else 0.0
    q = p / (p - 1.0)
    return c1 ** (1.0 / q) * c2 ** (1.0 / p)


def upper_certificate(K: KernelSpec, mu: Measure, nu: Measure, p: float = 2.0,
                      eps_values=None) -> float:
    """Upper bound for the restricted norm.

    For p = 2 it is the largest norm of the truncated operators over an eps
    grid that reaches below the smallest distance between the supports; at
    that eps the truncation keeps every off-diagonal entry, and every
    separated block is a submatrix of it.  For p != 2 a weighted Schur test.
    """
    Kmat, mw, nw = _kernel_matrix(K, mu, nu)
    if p != 2:
        return _schur_test_bound(Kmat, mw, nw, p)
    d = _distance(mu, nu)
    pos = d[d > 0]
    floor = 0.5 * float(pos.min()) if pos.size else 1.0
    eps = np.asarray([] if eps_values is None else eps_values, dtype=float)
    eps = np.concatenate([eps, [floor]])
    B = np.sqrt(nw)[:, None] * Kmat * np.sqrt(mw)[None, :]
    best = 0.0
    for e in eps:
        Be = np.where(d > e, B, 0.0)
        if Be.size:
            best = max(best, float(np.linalg.norm(Be, 2)))
    return best


def restricted_bound_estimate(K: KernelSpec, mu: Measure, nu: Measure, p: float = 2.0,
                              trials: int = 64, rng_seed: int = 0,
                              eps_values=None) -> RestrictedBound:
    """Randomized lower bound for the restricted norm, plus an upper certificate."""
    if not p > 1:
        raise ValueError("p must lie in (1, inf)")
    sep = _separation(mu, nu)
    Kmat, mw, nw = _kernel_matrix(K, mu, nu)
    mpts, npts = mu.lumped().points, nu.lumped().points
    rng = np.random.default_rng(rng_seed)
    best, best_split = 0.0, None
    for _ in range(trials):
        fm, gm = _random_split(rng, mpts, npts, sep, mu.is_circle)
        if not fm.any() or not gm.any():
            continue
        sub = Kmat[np.ix_(gm, fm)]
        if p == 2:
            B = np.sqrt(nw[gm])[:, None] * sub * np.sqrt(mw[fm])[None, :]
            val = float(np.linalg.norm(B, 2))
        else:
            val = _holder_ascent(sub, mw[fm], nw[gm], p, rng)
        if val > best:
            best, best_split = val, (np.flatnonzero(fm), np.flatnonzero(gm))
    upper = upper_certificate(K, mu, nu, p, eps_values)
    return RestrictedBound(best, upper, p, trials, best_split)


@dataclass(frozen=True)
class SchurReport:
    km_lower: float
    k_upper: float
    variation: float
    slack: float
    passed: bool


def schur_bound_check(K: KernelSpec, M: SchurMultiplierSpec, mu: Measure, nu: Measure,
                      p: float = 2.0, trials: int = 32, rng_seed: int = 0) -> SchurReport:
    km = restricted_bound_estimate(schur_apply(K, M), mu, nu, p, trials, rng_seed).lower
    ku = upper_certificate(K, mu, nu, p)
    bound = M.variation * ku
    slack = bound - km
    return SchurReport(km, ku, M.variation, slack, bool(km <= bound * (1 + 1e-12) + 1e-15))


# uniform boundedness of regularizations

FAMILIES = ("trunc", "smooth", "cauchy", "radial")


def regularized_matrix(K: KernelSpec, family: str, eps: float, mu: Measure,
                       nu: Measure) -> np.ndarray:
    m, n = mu.lumped(), nu.lumped()
    circle = K.circle or m.support == CIRCLE
    xs = n.points if circle else n.positions
    ys = m.points if circle else m.positions
    X, Y = xs[:, None], ys[None, :]
    if family in K.regularized:
        Kr = np.asarray(K.regularized[family](eps)(X, Y), dtype=complex)
    elif family == "trunc":
        Kr = np.where(np.abs(X - Y) > eps, K(X, Y), 0.0)
    elif family == "smooth":
        Kr = smooth_cutoff(np.abs(X - Y) / eps) * K(X, Y)
    elif family == "cauchy":
        Kr = K(X, Y) * cauchy_multiplier_line(eps)(X - Y)
    elif family == "radial":
        Kr = K(X, Y) * cauchy_multiplier_circle(eps)(np.conj(Y) * X)
    else:
        raise ValueError(f"unknown regularization family {family!r}")
    Kr = np.broadcast_to(np.asarray(Kr, dtype=complex), (n.dim, m.dim))
    return np.sqrt(n.weights)[:, None] * Kr * np.sqrt(m.weights)[None, :]


@dataclass(frozen=True)
class ScanResult:
    eps: np.ndarray
    norms: np.ndarray
    target: float
    tail: int = 10

    @property
    def sup(self) -> float:
        return float(np.max(self.norms)) if self.norms.size else 0.0

    @property
    def tail_ratio(self) -> float:
        t = self.norms[-self.tail:]
        if t.size == 0 or np.min(t) == 0:
            return 1.0 if t.size == 0 or np.max(t) == 0 else np.inf
        return float(np.max(t) / np.min(t))

    @property
    def passed(self) -> bool:
        return self.sup <= self.target

    def rows(self):
        return [(float(e), float(v)) for e, v in zip(self.eps, self.norms)]


def uniform_bound_scan(K: KernelSpec, regularizer_family: str, mu: Measure, nu: Measure,
                       eps_grid, C_target: Optional[float] = None, trials: int = 32,
                       rng_seed: int = 0) -> ScanResult:
    """Operator norms of the regularized operators over the grid.

    For the radial family the grid holds the radii r.  Without an explicit
    target the scan uses 4 times the restricted-bound estimate.
    """
    eps = np.asarray(eps_grid, dtype=float)
    norms = np.array([np.linalg.norm(regularized_matrix(K, regularizer_family, e, mu, nu), 2)
                      if min(mu.dim, nu.dim) else 0.0 for e in eps])
    if C_target is None:
        C_target = 4.0 * restricted_bound_estimate(K, mu, nu, 2.0, trials, rng_seed).lower
    return ScanResult(eps, norms, float(C_target))


# well-mixed sets

@dataclass(frozen=True)
class WellMixedPair:
    E: np.ndarray
    F: np.ndarray
    level: int
    block_level: int
    table: list
    max_error: float
    passed: bool
    excluded_atoms: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _thue_morse(k: np.ndarray) -> np.ndarray:
    bits = np.zeros_like(k)
    v = k.copy()
    while np.any(v):
        bits ^= v & 1
        v >>= 1
    return bits


def dyadic_table(masses: np.ndarray, inE: np.ndarray, inF: np.ndarray, n: int):
    """Relative halving errors over all dyadic intervals of levels 0..n.

    Cells are assumed to fill [0, 1] in order, with 2^n dividing their count.
    """
    N = masses.size
    rows = []
    worst = 0.0
    for k in range(n + 1):
        per = N // 2 ** k
        tot = masses.reshape(2 ** k, per).sum(axis=1)
        e = (masses * inE).reshape(2 ** k, per).sum(axis=1)
        f = (masses * inF).reshape(2 ** k, per).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            err = np.where(tot > 0, np.maximum(np.abs(e - tot / 2), np.abs(f - tot / 2)) / tot, 0.0)
        lvl = float(err.max())
        worst = max(worst, lvl)
        rows.append({"level": k, "intervals": 2 ** k, "max_rel_error": lvl})
    return rows, worst


def well_mixed_sets(sigma: Measure, n: int, pattern: str = "alternating",
                    gap_cells: int = 0) -> WellMixedPair:
    """Index sets E, F over the grid cells of sigma, well mixed down to scale 2^-n.

    Cells are grouped into blocks of 2^-(m) of the grid length, m > n, and
    blocks alternate between E and F (or follow the Thue-Morse sequence).
    The block level grows until every dyadic interval of size >= 2^-n is
    split within 2^-n relative error, or the blocks reach single cells.
    Atoms belong to neither set.  gap_cells > 0 leaves that many cells
    empty at the start of each block, which separates E from F at the cost
    of the halving accuracy.
    """
    if sigma.grid is None:
        raise MeasureError("well-mixed sets need a density grid")
    if n < 0:
        raise ValueError("level must be nonnegative")
    N = sigma.grid.n
    if N % (2 ** n):
        raise MeasureError(f"grid of {N} cells cannot be split into 2^{n} dyadic intervals")
    masses = sigma.cell_masses
    tol = 2.0 ** (-n) * (1 + 1e-12) + 1e-15
    idx = np.arange(N)
    best = None
    m = n + 1
    while True:
        per_block = N / 2 ** m
        if per_block < 1 + gap_cells and best is not None:
            break
        bs = max(1, int(per_block))
        block = idx // bs
        lab = _thue_morse(block) if pattern == "thue_morse" else block & 1
        live = (idx % bs) >= gap_cells
        inE = (lab == 0) & live
        inF = (lab == 1) & live
        table, worst = dyadic_table(masses, inE, inF, n)
        best = (inE, inF, m, table, worst)
        if worst <= tol or bs == 1:
            break
        m += 1
    inE, inF, m, table, worst = best
    return WellMixedPair(np.flatnonzero(inE), np.flatnonzero(inF), n, m, table, worst,
                         bool(worst <= tol), np.arange(sigma.n_atoms))


def planar_scan(K: KernelSpec, src, src_weights, tgt, tgt_weights, family: str,
                eps_grid) -> np.ndarray:
    """Norms of trunc/smooth regularizations of a planar kernel on point clouds."""
    z = np.asarray(tgt, dtype=complex)[:, None]
    w = np.asarray(src, dtype=complex)[None, :]
    Kz = K(z, w)
    scale = np.sqrt(np.asarray(tgt_weights, float))[:, None] * np.sqrt(
        np.asarray(src_weights, float))[None, :]
    out = []
    for e in np.asarray(eps_grid, dtype=float):
        if family == "trunc":
            cut = np.abs(z - w) > e
        elif family == "smooth":
            cut = smooth_cutoff(np.abs(z - w) / e)
        else:
            raise ValueError("planar kernels support trunc and smooth only")
        out.append(np.linalg.norm(scale * Kz * cut, 2))
    return np.asarray(out)
