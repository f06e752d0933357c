"""Exact Connes-Kreimer Hopf algebra, Birkhoff factorization and Lax flows."""

__version__ = "0.1.0"
