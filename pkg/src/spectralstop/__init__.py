"""Subspace iteration for symmetric matrices with a row-wise (2->inf)
stopping criterion, executable convergence-rate bounds, and spectral graph
experiments (centrality, clustering, sweep cuts)."""

__version__ = "0.1.0"
