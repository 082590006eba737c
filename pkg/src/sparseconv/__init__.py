"""Stability bounds for sparse convolutions on torsion-free groups."""

__version__ = "0.1.0"
