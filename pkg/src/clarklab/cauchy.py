"""Cauchy-type transforms of measures, their regularizations and boundary values.

Grid cells are integrated in closed form, so the transforms of a measure
with piecewise-constant density are exact up to rounding.  Boundary values
are approximated along radial/vertical rays with Richardson extrapolation.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measures import (CIRCLE, LINE, TWO_PI, Measure, MeasureError, OperatorMatrix,
                       require_circle, require_line)

PLUS = "plus"
MINUS = "minus"
_CHUNK = 256


class PoleError(ValueError):
    pass


class BoundaryError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyticField:
    eval_points: np.ndarray
    values: np.ndarray
    side: str = "none"


@dataclass(frozen=True)
class BoundaryField:
    boundary_points: np.ndarray
    values: np.ndarray
    converged_flags: np.ndarray
    side: str = PLUS

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged_flags))

    def non_converged(self) -> np.ndarray:
        return self.boundary_points[~self.converged_flags]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point", "re", "im", "converged"])
        for p, v, c in zip(self.boundary_points, self.values, self.converged_flags):
            w.writerow([_fmt_point(p), repr(float(v.real)), repr(float(v.imag)), int(c)])
        return buf.getvalue()


def _fmt_point(p) -> str:
    p = complex(p)
    if p.imag == 0:
        return repr(p.real)
    return f"{p.real!r}{p.imag:+.17g}j"


def _samples(mu: Measure, f) -> np.ndarray:
    if f is None:
        return np.ones(mu.dim, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f.shape[0] != mu.dim:
        raise ValueError(f"sample vector has length {f.shape[0]}, measure has {mu.dim} samples")
    return f


# kernel rows

def _line_rows(mu: Measure, lam: np.ndarray, side: Optional[str]) -> np.ndarray:
    """Rows K with K @ f = integral of f(t) dmu(t) / (t - lam)."""
    lam = lam.astype(complex)
    out = np.empty((lam.size, mu.dim), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, :mu.n_atoms] = mu.weights[None, :] / (mu.positions[None, :] - lam[:, None])
    if mu.grid is not None:
        e = mu.grid.edges
        lo, hi = e[None, :-1], e[None, 1:]
        dens = mu.grid.density[None, :]
        on_axis = (lam.imag == 0)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            gen = np.log(hi - lam[:, None]) - np.log(lo - lam[:, None])
            x = lam.real[:, None]
            real = np.log(np.abs(hi - x)) - np.log(np.abs(lo - x))
        inside = (x > lo) & (x < hi)
        sgn = 0.0 if side is None else (1.0 if side == PLUS else -1.0)
        axis = real + 1j * np.pi * sgn * inside
        out[:, mu.n_atoms:] = dens * np.where(on_axis, axis, gen)
    return out


def _circle_rows(mu: Measure, lam: np.ndarray, side: Optional[str]) -> np.ndarray:
    """Rows K with K @ f = integral of f(xi) dmu(xi) / (1 - conj(xi) lam)."""
    lam = lam.astype(complex)
    out = np.empty((lam.size, mu.dim), dtype=complex)
    xi = mu.points
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, :mu.n_atoms] = mu.weights[None, :] / (1.0 - np.conj(xi)[None, :] * lam[:, None])
    if mu.grid is not None:
        e = mu.grid.edges
        ea, eb = np.exp(1j * e[None, :-1]), np.exp(1j * e[None, 1:])
        r = np.abs(lam)[:, None]
        L = lam[:, None]
        if side is None:
            use_in = r < 1
        else:
            use_in = np.broadcast_to(np.asarray(side == PLUS), r.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = 1j * (e[None, 1:] - e[None, :-1]) + np.log(1 - L * np.conj(eb)) \
                - np.log(1 - L * np.conj(ea))
            outer = np.log(1 - eb / L) - np.log(1 - ea / L)
        vals = np.where(use_in, inner, outer) / (2j * np.pi)
        out[:, mu.n_atoms:] = mu.grid.density[None, :] * vals
    return out


def _rows(mu: Measure, lam: np.ndarray, side: Optional[str]) -> np.ndarray:
    return _circle_rows(mu, lam, side) if mu.is_circle else _line_rows(mu, lam, side)


def _apply(mu: Measure, f, lam, side: Optional[str] = None) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    f = _samples(mu, f)
    shape = (lam.size,) + f.shape[1:]
    out = np.empty(shape, dtype=complex)
    for k in range(0, lam.size, _CHUNK):
        out[k:k + _CHUNK] = _rows(mu, lam[k:k + _CHUNK], side) @ f
    return out


def _check_off_support(mu: Measure, lam: np.ndarray):
    pts = mu.points
    if pts.size:
        d = np.abs(lam[:, None] - pts[None, :]).min(axis=1)
        if np.any(d == 0):
            raise PoleError("evaluation point coincides with an atom")
    if mu.grid is not None and not mu.is_circle:
        x = lam.real
        e = mu.grid.edges
        on = lam.imag == 0
        if np.any(on):
            k = np.clip(np.searchsorted(e, x[on]) - 1, 0, mu.grid.n - 1)
            inside = (x[on] >= e[k]) & (x[on] <= e[k + 1]) & (mu.grid.density[k] > 0)
            if np.any(inside):
                raise BoundaryError("point on the real axis inside the density support")


def cauchy_line(mu: Measure, f, lam):
    """R f mu(lam) = integral of f(t) dmu(t) / (t - lam)."""
    require_line(mu)
    arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    _check_off_support(mu, arr)
    out = _apply(mu, f, arr)
    return out[0] if np.ndim(lam) == 0 else out


def _circle_eval(mu: Measure, f, lam, kind: str):
    require_circle(mu)
    arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(np.abs(np.abs(arr) - 1.0) < 1e-15):
        raise BoundaryError("point on the unit circle; use boundary_values")
    _check_off_support(mu, arr)
    fs = _samples(mu, f)
    if kind == "R":
        out = _apply(mu, fs, arr)
    else:
        r1 = _circle_r1_rows(mu, arr, fs)
        out = r1 if kind == "R1" else r1 + _apply(mu, fs, arr)
    return out[0] if np.ndim(lam) == 0 else out


def _circle_r1_rows(mu: Measure, lam: np.ndarray, fs: np.ndarray) -> np.ndarray:
    # atoms through the kernel conj(xi) lam / (1 - conj(xi) lam); cells as R - mass
    xi = mu.points
    na = mu.n_atoms
    k = np.conj(xi)[None, :] * lam[:, None]
    out = (k / (1 - k) * mu.weights[None, :]) @ fs[:na]
    if mu.grid is not None:
        cells = Measure(CIRCLE, [], [], mu.grid)
        out = out + _apply(cells, fs[na:], lam) - np.tensordot(
            mu.cell_masses, fs[na:], axes=(0, 0))
    return out


def cauchy_circle_R(mu: Measure, f, lam):
    """R f mu(lam) = integral of f dmu / (1 - conj(xi) lam)."""
    return _circle_eval(mu, f, lam, "R")


def cauchy_circle_R1(mu: Measure, f, lam):
    """Integral of conj(xi) lam f dmu / (1 - conj(xi) lam)."""
    return _circle_eval(mu, f, lam, "R1")


def cauchy_circle_R2(mu: Measure, f, lam):
    """Integral of (1 + conj(xi) lam) / (1 - conj(xi) lam) f dmu."""
    return _circle_eval(mu, f, lam, "R2")


def boundary_exact(mu: Measure, f, side: str, points) -> np.ndarray:
    """One-sided boundary values from the closed-form cell integrals.

    Returns the limit of R f mu from the given side: from inside the disc
    (plus) or outside (minus) on the circle, from above (plus) or below
    (minus) on the line.  Points must avoid atoms and grid edges.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    return _apply(mu, f, pts, side)


def T_boundary_exact(mu: Measure, f, side: str, points) -> np.ndarray:
    """T_plus / T_minus in the convention of `boundary_values`."""
    v = boundary_exact(mu, f, side, points)
    return -v if mu.support == LINE else v


def radial_limit(evaluate, points, side: str, circle: bool, rtol: float = 1e-8,
                 delta0: float = 0.125, kmax: int = 48, order: int = 6):
    """Limit of evaluate(lam) as lam approaches `points` along rays.

    Samples at delta_k = delta0 2^-k feed a Richardson table (the error is a
    power series in delta for points where the function extends smoothly
    from the given side).  A point is converged once three consecutive
    extrapolated values agree within rtol * max(1, |value|).
    Returns (values, converged flags).
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    n = pts.size
    best = np.full(n, np.nan + 0j)
    conv = np.zeros(n, dtype=bool)
    active = np.arange(n)
    tables: list[np.ndarray] = []
    history: list[np.ndarray] = []
    for k in range(kmax + 1):
        delta = delta0 * 2.0 ** (-k)
        if circle:
            lam = pts[active] * ((1.0 - delta) if side == PLUS else (1.0 + delta))
        else:
            lam = pts[active] + (1j * delta if side == PLUS else -1j * delta)
        row = [np.asarray(evaluate(lam), dtype=complex)]
        prev = tables[-1] if tables else None
        for j in range(1, min(k, order) + 1):
            row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (2.0 ** j - 1.0))
        row_arr = np.array(row)
        est = row_arr[-1]
        history.append(est)
        tables.append(row_arr)
        best[active] = est
        if len(history) >= 3:
            e0, e1, e2 = history[-3:]
            scale = np.maximum(1.0, np.abs(e2))
            ok = (np.abs(e2 - e1) <= rtol * scale) & (np.abs(e1 - e0) <= rtol * scale)
            ok &= np.isfinite(e2)
            if np.any(ok):
                conv[active[ok]] = True
                keep = ~ok
                active = active[keep]
                tables = [t[:, keep] for t in tables]
                history = [h[keep] for h in history]
        if active.size == 0:
            break
    return best, conv


def boundary_values(mu: Measure, f, side: str, boundary_grid, rtol: float = 1e-8,
                    delta0: float = 0.125, kmax: int = 48) -> BoundaryField:
    """T_plus f or T_minus f on the boundary grid.

    Circle: T_pm f(z) = lim R f mu(r z) with r -> 1 from inside (plus) or
    outside (minus).  Line: T_pm f(s) = lim integral f(t) dmu(t) / (s - t +- i eps),
    that is minus R f mu(s +- i eps).
    """
    if side not in (PLUS, MINUS):
        raise ValueError("side must be 'plus' or 'minus'")
    pts = np.atleast_1d(np.asarray(boundary_grid, dtype=complex))
    fs = _samples(mu, f)

    def ev(lam):
        return _apply(mu, fs, lam)

    vals, conv = radial_limit(ev, pts, side, mu.is_circle, rtol, delta0, kmax)
    if not mu.is_circle:
        vals = -vals
    return BoundaryField(pts, vals, conv, side)


# regularized singular integral operators

def _psi(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def smooth_cutoff(x):
    """C-infinity regularizer: 0 for |x| <= 1, 1 for |x| >= 2."""
    return _psi(np.abs(np.asarray(x, dtype=float)) - 1.0)


LINE_FAMILIES = ("cauchy_plus", "cauchy_minus", "trunc", "smooth")


def line_regularized_kernel(family: str, eps: float):
    if eps <= 0:
        raise ValueError("eps must be positive")
    if family not in LINE_FAMILIES:
        raise ValueError(f"unknown regularization family {family!r}")

    def kernel(s, t):
        d = np.asarray(s, dtype=complex) - np.asarray(t, dtype=complex)
        if family == "cauchy_plus":
            return 1.0 / (d + 1j * eps)
        if family == "cauchy_minus":
            return 1.0 / (d - 1j * eps)
        dist = np.abs(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(dist > 0, 1.0 / np.where(dist > 0, d, 1.0), 0.0)
        if family == "trunc":
            return np.where(dist > eps, inv, 0.0)
        return smooth_cutoff(dist / eps) * inv

    return kernel


def _weighted(kernel_values: np.ndarray, nu: Measure, mu: Measure) -> np.ndarray:
    return np.sqrt(nu.weights)[:, None] * kernel_values * np.sqrt(mu.weights)[None, :]


def regularized_T_eps_line(mu: Measure, nu: Measure, kernel_family: str,
                           eps: float) -> OperatorMatrix:
    """Matrix of T_eps: L^2(mu) -> L^2(nu), entries K_eps(s, t) sqrt(nu_s mu_t)."""
    require_line(mu)
    require_line(nu)
    disc = not (mu.is_atomic and nu.is_atomic)
    m, n = mu.lumped(), nu.lumped()
    K = line_regularized_kernel(kernel_family, eps)(n.positions[:, None], m.positions[None, :])
    return OperatorMatrix(_weighted(np.asarray(K, dtype=complex), n, m), m, n, disc)


def regularized_T_r_circle(mu: Measure, nu: Measure, r: float) -> OperatorMatrix:
    """Matrix of T_r f(z) = integral f(xi) dmu(xi) / (1 - r conj(xi) z)."""
    require_circle(mu)
    require_circle(nu)
    if r < 0 or r == 1:
        raise ValueError("r must be nonnegative and different from 1")
    disc = not (mu.is_atomic and nu.is_atomic)
    m, n = mu.lumped(), nu.lumped()
    K = 1.0 / (1.0 - r * np.conj(m.points)[None, :] * n.points[:, None])
    return OperatorMatrix(_weighted(K, n, m), m, n, disc)


def eps_grid(lo_exp: int = 0, hi_exp: int = 20) -> np.ndarray:
    """2^-lo_exp down to 2^-hi_exp."""
    return 2.0 ** (-np.arange(lo_exp, hi_exp + 1, dtype=float))


__all__ = [
    "AnalyticField", "BoundaryField", "BoundaryError", "PoleError", "PLUS", "MINUS",
    "cauchy_line", "cauchy_circle_R", "cauchy_circle_R1", "cauchy_circle_R2",
    "boundary_values", "boundary_exact", "T_boundary_exact", "radial_limit",
    "regularized_T_eps_line", "regularized_T_r_circle", "smooth_cutoff",
    "line_regularized_kernel", "eps_grid", "MeasureError", "TWO_PI",
]
