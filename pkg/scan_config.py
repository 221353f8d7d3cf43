# Settings for the scanners (lib/scanners.py) and the scan-* commands

import os

from lib.errors import SliceRegError

# Default number of workers for concurrent.futures.ThreadPoolExecutor; SLICEREG_THREADS overrides it
MAX_WORKERS = os.cpu_count() or 1


def max_workers():
    raw = os.environ.get("SLICEREG_THREADS")
    if raw is None or raw.strip() == "":
        return MAX_WORKERS
    try:
        workers = int(raw)
    except ValueError:
        raise SliceRegError(f"SLICEREG_THREADS must be a positive integer, got {raw!r}") from None
    if workers < 1:
        raise SliceRegError(f"SLICEREG_THREADS must be a positive integer, got {raw!r}")
    return workers


# Number of alpha rows handed to one worker
CHUNK_SIZE = 8

## Default grid
ALPHA_STEPS = 64
BETA_STEPS = 64
THETA_STEPS = 32
PHI_STEPS = 64
GRID_TOL = 1e-6

## Zero and root finding
ROOT_CLUSTER_TOL = 1e-5     # Roots of N(f)'s stem closer than this are one sphere
NEWTON_STEPS = 50
CIRCLE_SAMPLES = 64         # Points emitted for a circle of singular units

## Injectivity sampling
COLLISION_CELL = 1e-6       # Quantization cell for image buckets
COLLISION_IMAGE_TOL = 1e-8
COLLISION_PREIMAGE_TOL = 1e-4

## Total multiplicity
MULTIPLICITY_REL_TOL = 1e-8  # Remainder norm <= this * coefficient norm counts as divisible

## Export options
CSV_FLOAT_FORMAT = "%.17g"

## Worked-example verification (lib/verify.py)
VERIFY_SAMPLES = 1000        # Random points per pointwise check
VERIFY_INJECTIVITY_SAMPLES = 10000
VERIFY_SINGULAR_GRID = (32, 32, 16, 32)  # alpha, beta, theta, phi steps for the singular-set check
