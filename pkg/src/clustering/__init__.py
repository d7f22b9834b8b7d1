"""Density-peak clustering and fuzzy gating."""
