"""Numerical laboratory for multiparameter Forelli-Rudin type operators on the Siegel upper half-space."""

__version__ = "0.1.0"
