"""Simulation and Monte-Carlo verification of maximal inequalities for
multiindexed demimartingales."""

from .fields import FieldSample, FixedField, GeneratorSpec, partial_sums, sample_field, simulate
from .lattice import LatticeBox, MultiIndex, box_iter, direction_line, leq, slice_replace

__version__ = "0.1.0"

__all__ = [
    "FieldSample", "FixedField", "GeneratorSpec", "LatticeBox", "MultiIndex", "box_iter", "direction_line",
    "leq", "partial_sums", "sample_field", "simulate", "slice_replace",
]
