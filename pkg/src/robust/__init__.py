"""Truncated loss, sample pruning, Adam and the robust training loop."""
