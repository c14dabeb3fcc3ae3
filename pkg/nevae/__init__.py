"""Neighbor Embedding VAE toolkit."""

__version__ = "0.1.0"
