"""Spectral representation in the Dirichlet-Laplacian eigenbasis."""
