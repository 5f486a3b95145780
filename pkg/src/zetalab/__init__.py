"""Numerical laboratory for discrete mixed joint universality of zeta-functions."""

__version__ = "0.1.0"
