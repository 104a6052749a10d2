"""Density of the martingale limit of Galton-Watson processes with rational PGFs."""

__version__ = "0.1.0"
