"""Finite-scale tools for depth scores of covers, Property-A witnesses,
asymptotic dimension estimates and quasi-isometric pullbacks."""

__version__ = "0.1.0"
