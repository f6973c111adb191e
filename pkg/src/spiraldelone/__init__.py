"""Exact and certified diagnostics for Archimedean spirals n^alpha e^{2 pi i n theta}
as Delone sets under the relative metric |z - w| / (|z|^beta + |w|^beta)."""

from .exactreal import QuadExt, parse_theta
from .spiral import SpiralParams

__all__ = ["QuadExt", "SpiralParams", "parse_theta"]
__version__ = "0.1.0"
