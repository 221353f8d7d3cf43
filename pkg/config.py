# Settings shared by the slicereg library and command line tools.
# Read as a dict through lib.io_.get_config(); override per run with CLI flags.

import os

## Paths
WAREHOUSE_ROOT = "warehouse"
FUNCTION_ROOT = os.path.join(WAREHOUSE_ROOT, "functions")       # Ready-made function specs (JSON)
OUTPUT_ROOT = os.path.join(WAREHOUSE_ROOT, "outputs")           # Exported clouds and reports
LOG_WRITE_ROOT = os.path.join(WAREHOUSE_ROOT, "logs")
LOG_FILE_NAME = "slicereg_log.json"                             # Run log name; each day gets its own file, slicereg_log_YYYY-MM-DD.json
LOG_KEEP_DAYS = 30                                              # Daily logs older than this are deleted

## Numerics
DEFAULT_TOL = 1e-9          # Absolute comparison tolerance unless an operation says otherwise
FD_STEP = 1e-6              # Central differences use h = FD_STEP * max(1, |z|), times min(1, beta) off the real axis
PARITY_PROBES = 16          # Random points used to spot-check parity of closure stems
PARITY_TOL = 1e-8
PREDICATE_PROBES = 64       # Probe points for is_real / is_slice_constant on closure stems
RANK_TOL = 1e-8             # Relative singular value cut-off for the numerical rank
DEGENERATE_TOL = 1e-10      # |d_s f| below this falls through to the degenerate branch
MULTIPLICITY_TOL = 1e-10    # Derivative threshold for holomorphic multiplicity
SPHERE_TOL = 1e-6           # Membership in S_y for the stereographic projection

## Default domain rectangle (alpha range, beta range) when a function spec omits one
DEFAULT_ALPHA = (-2.0, 2.0)
DEFAULT_BETA = (0.0, 2.0)
