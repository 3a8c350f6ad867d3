"""Numerical toolkit for Harnack domination and equivalence of rho-contractions."""

__version__ = "0.1.0"
