"""Configuration and constants for the noise-robust classification toolkit."""

import os

# Model (hidden width and activation per the reference hyperparameter table)
HIDDEN_WIDTH = 20
HIDDEN_SIZES = [HIDDEN_WIDTH]
ROBUST_HIDDEN_ACTIVATION = "elu"
ROBUST_OUTPUT_ACTIVATION = "softmax"
CLASSIC_ACTIVATION = "logistic"

# Truncated loss
GCE_Q = 0.7
TRUNCATION_K = 0.5
SAMPLE_RATE = 1.0
PRUNE_WARMUP_EPOCHS = 10

# Optimizer (robust and cross-entropy baselines)
LEARNING_RATE = 1e-4
BATCH_SIZE = 128
EPOCHS = 20
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Classic backprop mode (logistic units, squared error, plain gradient descent)
CLASSIC_LEARNING_RATE = 0.5
CLASSIC_EPOCHS = 20
CLASSIC_BATCH_SIZE = 128
CLASSIC_TARGET_ERROR = 0.0

# Data
TEST_RATIO = 0.2
MIXUP_ALPHA = 0.2
NOISE_RATES = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
SEEDS = [0, 1, 2, 3, 4]

# Density-peak clustering and gating
CUTOFF_PERCENT = 2  # l_z sits at the boundary of the largest 2% of pairwise distances
CENTER_THRESHOLD = 3.0  # auto policy: gamma > mean + c * std
MEMBERSHIP_DENOM = 0.02
DENSITY_BLOCK_ROWS = 1024  # rows of the density kernel held at once

# Output
CSV_FLOAT_FORMAT = "%.17g"
MODEL_FORMAT = "amnn-model"
MODEL_FORMAT_VERSION = 1

# Environment overrides (loaded from .env by the CLI)
LOG_LEVEL = os.environ.get("AMNN_LOG_LEVEL", "INFO").upper()
OUTPUT_DIR = os.environ.get("AMNN_OUTPUT_DIR", "results")


def workers() -> int:
    """Sweep cell parallelism; read late so .env values loaded by the CLI apply."""
    try:
        return max(1, int(os.environ.get("AMNN_WORKERS", "1")))
    except ValueError:
        return 1


def progress_enabled() -> bool:
    return os.environ.get("AMNN_PROGRESS", "1").strip().lower() not in ("0", "false", "no")
