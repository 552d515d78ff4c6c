"""Entropic separability criteria for bipartite quantum systems."""

__version__ = "0.1.0"
