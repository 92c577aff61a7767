"""Executable generalized polynomials, unipotent nilrotations and return-time sets."""

__version__ = "0.1.0"
