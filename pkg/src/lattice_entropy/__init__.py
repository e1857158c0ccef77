"""Lattice geometry and entropy of multidimensional cellular automata."""

__version__ = "0.1.0"
