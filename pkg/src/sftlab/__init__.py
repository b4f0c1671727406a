"""Exact-arithmetic graded series, descendant recursion, and chain complexes."""

__version__ = "0.1.0"
