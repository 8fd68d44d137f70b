"""Exact-arithmetic toolkit for function-field lattice and Hecke computations."""

__version__ = "0.1.0"
