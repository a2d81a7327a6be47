"""Computational core: modular arithmetic, Kloosterman tables, Chebyshev algebra, statistics."""
