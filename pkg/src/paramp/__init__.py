"""Numerical laboratory for Josephson parametric amplifiers."""

__version__ = "0.1.0"
