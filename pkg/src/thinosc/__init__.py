"""Numerical laboratory for thin domains with highly oscillatory boundaries."""

__version__ = "0.1.0"
