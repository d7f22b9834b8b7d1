"""Noise-robust modular neural networks for tabular classification."""
