"""Finite-dimensional toolkit for quantum Markov semigroup generators."""

__version__ = "0.1.0"
