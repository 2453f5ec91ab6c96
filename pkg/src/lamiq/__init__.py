"""Exact Voronoi cells, second moments, and optimal quantizer parameters for
one-parameter laminated lattice families."""

__version__ = "0.1.0"
