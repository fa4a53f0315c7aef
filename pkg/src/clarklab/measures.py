"""Finite measures on the real line and the unit circle.

A measure is a finite list of atoms plus an optional piecewise-constant
density on a uniform grid.  Functions in L^2(mu) are stored as sample
vectors: one value per atom followed by one value per grid cell.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

LINE = "line"
CIRCLE = "circle"
TWO_PI = 2.0 * np.pi


class MeasureError(ValueError):
    pass


class DomainMismatchError(MeasureError):
    pass


def wrap_angle(t):
    """Map angles into (-pi, pi]."""
    t = np.asarray(t, dtype=float)
    out = np.angle(np.exp(1j * t))
    # np.angle returns -pi for some inputs that should map to pi
    return np.where(np.isclose(out, -np.pi, rtol=0, atol=1e-15), np.pi, out)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [a, b] carrying a nonnegative density per cell.

    On the circle a and b are angles and the density is taken with respect
    to normalized arc length dt / 2pi.
    """

    a: float
    b: float
    density: np.ndarray

    def __post_init__(self):
        dens = _frozen(self.density)
        if dens.ndim != 1 or dens.size == 0:
            raise MeasureError("grid density must be a nonempty 1-d array")
        if not np.all(np.isfinite(dens)) or np.any(dens < 0):
            raise MeasureError("grid density must be finite and nonnegative")
        if not self.b > self.a:
            raise MeasureError("grid needs a < b")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "density", dens)

    @property
    def n(self) -> int:
        return int(self.density.size)

    @property
    def width(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def edges(self) -> np.ndarray:
        return self.a + self.width * np.arange(self.n + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.a + self.width * (np.arange(self.n) + 0.5)


@dataclass(frozen=True)
class Measure:
    support: str
    positions: np.ndarray
    weights: np.ndarray
    grid: Optional[Grid] = None
    label: str = ""

    def __post_init__(self):
        if self.support not in (LINE, CIRCLE):
            raise MeasureError(f"unknown support kind {self.support!r}")
        pos = np.asarray(self.positions, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pos.shape != w.shape:
            raise MeasureError("positions and weights differ in length")
        if not np.all(np.isfinite(pos)) or not np.all(np.isfinite(w)):
            raise MeasureError("atoms must be finite")
        if np.any(w <= 0):
            raise MeasureError("atom weights must be positive")
        if self.support == CIRCLE:
            pos = wrap_angle(pos)
        order = np.argsort(pos, kind="stable")
        pos, w = pos[order], w[order]
        if pos.size > 1 and np.any(np.diff(pos) <= 0):
            raise MeasureError("atom positions must be pairwise distinct")
        g = self.grid
        if g is not None:
            if self.support == CIRCLE:
                if g.b - g.a > TWO_PI * (1 + 1e-12):
                    raise MeasureError("circle grid longer than the circle")
                if g.width >= np.pi:
                    raise MeasureError("circle grid cells must be shorter than pi")
            for x in pos:
                if _in_positive_cell(g, x, self.support == CIRCLE):
                    raise MeasureError(
                        f"atom at {x} lies in a grid cell with positive density")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "weights", _frozen(w))

    # constructors

    @classmethod
    def line(cls, atoms: Sequence = (), grid: Optional[Grid] = None, label: str = ""):
        pos, w = _split_atoms(atoms)
        return cls(LINE, pos, w, grid, label)

    @classmethod
    def circle(cls, atoms: Sequence = (), grid: Optional[Grid] = None, label: str = ""):
        """Atoms given as (angle, weight) pairs."""
        pos, w = _split_atoms(atoms)
        return cls(CIRCLE, pos, w, grid, label)

    # sizes and masses

    @property
    def is_circle(self) -> bool:
        return self.support == CIRCLE

    @property
    def n_atoms(self) -> int:
        return int(self.positions.size)

    @property
    def n_cells(self) -> int:
        return 0 if self.grid is None else self.grid.n

    @property
    def dim(self) -> int:
        return self.n_atoms + self.n_cells

    @property
    def is_atomic(self) -> bool:
        return self.grid is None or not np.any(self.grid.density > 0)

    @property
    def cell_masses(self) -> np.ndarray:
        if self.grid is None:
            return np.zeros(0)
        scale = self.grid.width / TWO_PI if self.is_circle else self.grid.width
        return self.grid.density * scale

    @property
    def atom_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def cell_mass(self) -> float:
        return float(np.sum(self.cell_masses))

    @property
    def mass(self) -> float:
        return self.atom_mass + self.cell_mass

    @property
    def cell_positions(self) -> np.ndarray:
        return np.zeros(0) if self.grid is None else self.grid.midpoints

    @property
    def sample_positions(self) -> np.ndarray:
        return np.concatenate([self.positions, self.cell_positions])

    @property
    def sample_masses(self) -> np.ndarray:
        return np.concatenate([self.weights, self.cell_masses])

    @property
    def points(self) -> np.ndarray:
        """Atom locations as complex numbers (unimodular on the circle)."""
        return to_points(self.support, self.positions)

    @property
    def sample_points(self) -> np.ndarray:
        return to_points(self.support, self.sample_positions)

    def atom_slice(self) -> slice:
        return slice(0, self.n_atoms)

    def cell_slice(self) -> slice:
        return slice(self.n_atoms, self.dim)

    def ones(self) -> np.ndarray:
        return np.ones(self.dim, dtype=complex)

    def inner(self, f, g) -> complex:
        return complex(np.sum(np.asarray(f) * np.conj(g) * self.sample_masses))

    def norm(self, f) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2 * self.sample_masses)))

    def to_coords(self, f) -> np.ndarray:
        """Sample vector to coordinates in the orthonormal atom/cell basis."""
        return np.asarray(f, dtype=complex) * np.sqrt(self.sample_masses)

    def from_coords(self, c) -> np.ndarray:
        m = self.sample_masses
        out = np.zeros(self.dim, dtype=complex)
        pos = m > 0
        out[pos] = np.asarray(c)[pos] / np.sqrt(m[pos])
        return out

    def lumped(self) -> "Measure":
        """Replace every positive-density cell by an atom at its midpoint."""
        if self.grid is None:
            return self
        keep = self.grid.density > 0
        pos = np.concatenate([self.positions, self.grid.midpoints[keep]])
        w = np.concatenate([self.weights, self.cell_masses[keep]])
        lab = (self.label + " (discretized)").strip()
        return Measure(self.support, pos, w, None, lab)

    def scaled(self, c: float) -> "Measure":
        grid = None
        if self.grid is not None:
            grid = Grid(self.grid.a, self.grid.b, self.grid.density * c)
        return Measure(self.support, self.positions, self.weights * c, grid, self.label)

    def with_weights(self, weights) -> "Measure":
        return Measure(self.support, self.positions, weights, self.grid, self.label)

    # serialization

    def to_dict(self) -> dict:
        out = {
            "support": self.support,
            "atoms": [[float(p), float(w)] for p, w in zip(self.positions, self.weights)],
        }
        if self.grid is not None:
            out["grid"] = {
                "a": self.grid.a,
                "b": self.grid.b,
                "n": self.grid.n,
                "density": [float(v) for v in self.grid.density],
            }
        if self.label:
            out["label"] = self.label
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Measure":
        if "support" not in d:
            raise MeasureError("measure document lacks 'support'")
        grid = None
        if d.get("grid") is not None:
            gd = d["grid"]
            dens = np.asarray(gd["density"], dtype=float)
            if "n" in gd and int(gd["n"]) != dens.size:
                raise MeasureError("grid 'n' does not match density length")
            grid = Grid(gd["a"], gd["b"], dens)
        atoms = d.get("atoms", [])
        for a in atoms:
            if len(a) != 2:
                raise MeasureError("atoms must be [position, weight] pairs")
        pos, w = _split_atoms(atoms)
        return cls(d["support"], pos, w, grid, d.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "Measure":
        return cls.from_dict(json.loads(text))


def _in_positive_cell(g: Grid, x: float, circle: bool) -> bool:
    # cells are closed, so an atom on an edge touches both neighbours
    rel = x - g.a
    if circle:
        rel = np.mod(rel, TWO_PI)
        if rel > TWO_PI - 1e-14:
            rel -= TWO_PI
    tol = 1e-14 * max(1.0, abs(g.a), abs(g.b))
    k = np.arange(g.n)
    hit = (k * g.width - tol <= rel) & (rel <= (k + 1) * g.width + tol)
    return bool(np.any(g.density[hit] > 0))


def _split_atoms(atoms):
    atoms = list(atoms)
    if not atoms:
        return np.zeros(0), np.zeros(0)
    arr = np.asarray(atoms, dtype=float)
    return arr[:, 0], arr[:, 1]


def to_points(support: str, positions) -> np.ndarray:
    positions = np.asarray(positions, dtype=float)
    if support == CIRCLE:
        return np.exp(1j * positions)
    return positions.astype(complex)


def zero_measure(support: str, label: str = "") -> Measure:
    return Measure(support, [], [], None, label)


def require_line(mu: Measure):
    if mu.support != LINE:
        raise DomainMismatchError("operation needs a measure on the real line")


def require_circle(mu: Measure):
    if mu.support != CIRCLE:
        raise DomainMismatchError("operation needs a measure on the circle")


def poisson_mass(mu: Measure) -> float:
    """P = integral of d mu(x) / (1 + x^2), cells integrated exactly."""
    require_line(mu)
    p = float(np.sum(mu.weights / (1.0 + mu.positions ** 2)))
    if mu.grid is not None:
        e = mu.grid.edges
        p += float(np.sum(mu.grid.density * (np.arctan(e[1:]) - np.arctan(e[:-1]))))
    return p


def poisson_normalize(mu: Measure) -> Measure:
    p = poisson_mass(mu)
    if p <= 0:
        raise MeasureError("zero measure cannot be Poisson normalized")
    return mu.scaled(1.0 / p)


@dataclass(frozen=True)
class LebesgueParts:
    singular: Measure
    absolutely_continuous: Measure


def lebesgue_decompose(mu: Measure) -> LebesgueParts:
    sing = Measure(mu.support, mu.positions, mu.weights, None, mu.label)
    ac = Measure(mu.support, [], [], mu.grid, mu.label)
    return LebesgueParts(sing, ac)


def recombine(parts: LebesgueParts) -> Measure:
    s, a = parts.singular, parts.absolutely_continuous
    return Measure(s.support, s.positions, s.weights, a.grid, s.label)


def increasing_rearrangement(mu: Measure, interval) -> tuple[np.ndarray, float]:
    """Sorted density values of the cells inside `interval` and the cell width."""
    if mu.grid is None:
        raise MeasureError("measure has no density grid")
    a, b = map(float, interval)
    g = mu.grid
    tol = 1e-12 * max(1.0, abs(g.a), abs(g.b))
    if a < g.a - tol or b > g.b + tol or not b > a:
        raise MeasureError(f"interval [{a}, {b}] is not inside the grid [{g.a}, {g.b}]")
    e = g.edges
    inside = (e[:-1] >= a - tol) & (e[1:] <= b + tol)
    if not np.any(inside):
        raise MeasureError("interval contains no complete grid cell")
    return np.sort(g.density[inside]), g.width


@dataclass(frozen=True)
class ACCriterion:
    cutoffs: np.ndarray
    values: np.ndarray
    divergent: bool
    resolution_floor: float = field(default=0.0)


def _rearranged_integral(vals: np.ndarray, h: float, lo: float, hi: float) -> float:
    k = np.arange(vals.size)
    left = np.maximum(k * h, lo)
    right = np.minimum((k + 1) * h, hi)
    ok = right > left
    return float(np.sum(vals[ok] * (1.0 / left[ok] - 1.0 / right[ok])))


def ac_criterion_integral(mu: Measure, interval, epsilon: float, kmax: int = 40,
                          growth: float = 2.0) -> ACCriterion:
    """Integral of x^-2 w*(x) over [h, epsilon] for h = epsilon 2^-k.

    w* is the increasing rearrangement of the density on the interval.
    Cutoffs stop at the cell width: below one cell the rearranged density is
    constant, so the tail says nothing about the underlying measure.
    Divergence is flagged when each of the last three values exceeds
    `growth` times its predecessor.
    """
    if epsilon <= 0:
        raise MeasureError("epsilon must be positive")
    vals, h = increasing_rearrangement(mu, interval)
    hi = min(float(epsilon), vals.size * h)
    cut, out = [], []
    for k in range(kmax + 1):
        lo = epsilon * 2.0 ** (-k)
        if lo < h * (1 - 1e-12):
            break
        cut.append(lo)
        out.append(_rearranged_integral(vals, h, lo, hi) if lo < hi else 0.0)
    out_arr = np.asarray(out)
    divergent = False
    if out_arr.size >= 4:
        last = out_arr[-4:]
        divergent = bool(np.all(last[1:] > growth * last[:-1]) and last[-1] > 0)
    return ACCriterion(np.asarray(cut), out_arr, divergent, h)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix between weighted L^2 spaces, in orthonormal atom/cell bases.

    Rows index the samples of `target`, columns those of `source`.
    """

    matrix: np.ndarray
    source: Measure
    target: Measure
    discretized: bool = False

    @property
    def shape(self):
        return self.matrix.shape

    def norm(self) -> float:
        if self.matrix.size == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))
