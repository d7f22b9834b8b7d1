"""Experiment configuration, noise sweeps and reports."""
