"""Exact checks for flat deformations of monomial ideals and theta-series identities."""

__version__ = "0.1.0"
