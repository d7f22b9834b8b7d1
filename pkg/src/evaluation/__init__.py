"""Classification and clustering metrics."""
