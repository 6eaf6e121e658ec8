"""Clifford commutant algebra, stabilizer and dense simulation, and design-error analytics."""

__version__ = "0.1.0"
