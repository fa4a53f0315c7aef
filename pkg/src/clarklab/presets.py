"""Named measures and seeded random instances for the CLI and the acceptance suite."""
from __future__ import annotations

import numpy as np

from .measures import CIRCLE, LINE, Grid, Measure, MeasureError


def lebesgue_grid(n: int = 1024) -> Measure:
    """Normalized arc length on the circle as n equal cells."""
    if n < 2:
        raise MeasureError("lebesgue_grid needs at least 2 cells")
    return Measure(CIRCLE, [], [], Grid(-np.pi, np.pi, np.ones(int(n))), f"lebesgue({n})")


def atoms(points, weights=None, support: str = LINE, normalize: bool = False) -> Measure:
    pts = np.asarray(points, dtype=float)
    w = np.full(pts.size, 1.0 / max(pts.size, 1)) if weights is None else np.asarray(weights, float)
    if normalize:
        w = w / w.sum()
    return Measure(support, pts, w, None, "atoms")


def two_atom() -> Measure:
    return atoms([-1.0, 1.0], [0.5, 0.5])


def three_atom_circle() -> Measure:
    return atoms([-2.0, 0.3, 2.2], [0.3, 0.5, 0.2], CIRCLE)


def mixed(n_cells: int = 256, atom_weight: float = 0.3, gap_fraction: float = 0.125) -> Measure:
    """Probability measure on the circle: a smooth density vanishing on an arc, plus one atom inside the arc."""
    g = Grid(-np.pi, np.pi, np.ones(n_cells))
    x = g.midpoints
    w = 1.0 + 0.5 * np.cos(x) + 0.2 * np.sin(2 * x)
    start = n_cells // 2
    width = max(4, int(n_cells * gap_fraction))
    w[start:start + width] = 0.0
    pos = x[start + width // 2] + 0.25 * g.width
    raw = Measure(CIRCLE, [pos], [atom_weight], Grid(-np.pi, np.pi, w))
    M = raw.mass
    return Measure(CIRCLE, [pos], [atom_weight / M], Grid(-np.pi, np.pi, w / M), "mixed")


def random_line_atoms(rng: np.random.Generator, n: int, half_width: float = 1.0) -> Measure:
    """n atoms jittered around a uniform lattice in [-half_width, half_width], mass 1."""
    h = 2.0 * half_width / n
    x = -half_width + (np.arange(n) + rng.uniform(0.2, 0.8, n)) * h
    m = rng.uniform(0.5, 1.5, n)
    return Measure(LINE, x, m / m.sum(), None, f"random line ({n})")


def random_circle_atoms(rng: np.random.Generator, n: int) -> Measure:
    """n atoms jittered around the n-th roots of -1, probability weights."""
    t = -np.pi + (np.arange(n) + rng.uniform(0.2, 0.8, n)) * 2 * np.pi / n
    m = rng.uniform(0.5, 1.5, n)
    return Measure(CIRCLE, t, m / m.sum(), None, f"random circle ({n})")


def random_density(rng: np.random.Generator, n_cells: int, a: float = 0.0, b: float = 1.0,
                   modes: int = 4) -> Measure:
    """Line measure with a positive trigonometric density on [a, b]."""
    g = Grid(a, b, np.ones(n_cells))
    u = (g.midpoints - a) / (b - a)
    w = np.ones(n_cells)
    for k in range(1, modes + 1):
        w += rng.uniform(-0.4, 0.4) / k * np.cos(2 * np.pi * k * u + rng.uniform(0, 2 * np.pi))
    return Measure(LINE, [], [], Grid(a, b, np.clip(w, 0.05, None)), "random density")


def random_disc_point(rng: np.random.Generator, rmax: float = 0.8) -> complex:
    r = rmax * np.sqrt(rng.uniform())
    return complex(r * np.exp(2j * np.pi * rng.uniform()))


PRESETS = {
    "lebesgue_grid": lebesgue_grid,
    "atoms": atoms,
    "two_atom": two_atom,
    "three_atom": three_atom_circle,
    "mixed": mixed,
}


def measure_from_spec(spec) -> Measure:
    """A measure from a config entry.

    Accepted shapes: {"preset": name, ...keyword arguments}, a full measure
    document with "support", or {"file": path} holding such a document.
    """
    if isinstance(spec, str):
        spec = {"preset": spec}
    if not isinstance(spec, dict):
        raise MeasureError("measure entry must be an object or a preset name")
    if "file" in spec:
        with open(spec["file"], encoding="utf-8") as fh:
            return Measure.from_json(fh.read())
    if "support" in spec and "preset" not in spec:
        return Measure.from_dict(spec)
    name = spec.get("preset")
    if name not in PRESETS:
        raise MeasureError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kwargs = {k: v for k, v in spec.items() if k != "preset"}
    if name == "atoms":
        pts = kwargs.pop("points", None)
        if pts is None:
            raise MeasureError("preset 'atoms' needs 'points'")
        return atoms(pts, **kwargs)
    return PRESETS[name](**kwargs)
