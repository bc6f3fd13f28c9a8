"""Exact heat-kernel coefficients of Dirac operators via the Volterra calculus."""

__version__ = "0.1.0"
