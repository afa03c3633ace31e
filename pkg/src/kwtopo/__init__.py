"""Exact partition sums of normal factor graphs, chain complexes over Z_q and
finite-size Kramers-Wannier duality checks."""

__version__ = "0.1.0"
