"""Numerical toolkit for rank-one perturbations, Clark operators and their model spaces."""
from .measures import CIRCLE, LINE, Grid, Measure, MeasureError

__all__ = ["CIRCLE", "LINE", "Grid", "Measure", "MeasureError"]
__version__ = "0.1.0"
