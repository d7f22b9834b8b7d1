"""Dataset ingestion, synthesis, splitting, label noise and mixup."""
