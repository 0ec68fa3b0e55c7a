"""
Display Constants

This module contains all the default values used throughout the superresolution
display toolkit. Centralizing them makes it easy to retune the prototype geometry,
the solver schedule, or the analysis grids without touching the algorithms.

Author: CodeWithEzeh
Date: November 2025
"""

# === PROTOTYPE GEOMETRY ===
PANEL_COLS = 64              # Pixels per LCD panel row
PANEL_ROWS = 64              # Pixels per LCD panel column
PANEL_PITCH = 0.282          # mm per LCD pixel (22" 1680x1050 panel)
GAP_PANELS = 19.0            # mm between front and rear panel
GAP_DIFFUSER = 6.0           # mm between diffuser and front panel
SR_FACTOR = 2.0              # Superresolved pixels per LCD pixel per axis

# === DIFFUSER ===
DIFFUSER_HALF_ANGLE = 7.5    # Degrees, half of the 15 degree field of view
PROFILE_COSINE = "cosine"
PROFILE_UNIFORM = "uniform"
DIFFUSER_PROFILES = (PROFILE_COSINE, PROFILE_UNIFORM)
MIN_ANGULAR_SAMPLES = 2

# === PROJECTION OPERATOR ===
ROW_SUM_TOLERANCE = 1e-9     # Allowed drift of a normalized row sum
SNAP_TOLERANCE = 1e-9        # View samples this close to a pixel center count as exact
MIN_RAY_WEIGHT = 1e-15       # Angular pieces lighter than this are dropped

# === SOLVER ===
RANK = 4                     # Frames averaged by the eye (120 Hz panels, 30 Hz flicker)
OUTER_ITERS = 100            # ADMM iterations
SART_ITERS = 5               # SART sweeps per light field update
FACT_ITERS = 1               # F,G alternations per ADMM iteration
RHO = 1.0                    # ADMM penalty
TOL_PRIMAL = 1e-6            # Relative primal residual for early exit
SEED = 0
RELAXATION = 0.5             # SART step
REFINE_ITERS = 100           # Image-error pattern updates after the ADMM loop
STAGE_ADMM = "admm"
STAGE_REFINE = "refine"
INIT_LOW = 0.2               # Pattern initialization range
INIT_HIGH = 0.8
DIVISION_EPS = 1e-12
STANDALONE_FACT_ITERS = 200  # Alternations when factorizing on its own (HDR, 3D)

# === DISPLAY MODES ===
MODE_SUPERRES = "superres"
MODE_HDR = "hdr"
MODE_LIGHTFIELD = "lightfield3d"
DISPLAY_MODES = (MODE_SUPERRES, MODE_HDR, MODE_LIGHTFIELD)
BLACK_LEVEL = 0.15           # Simulated LCD black level (15% of peak)
VIEW_COLS = 5                # Horizontal views of the 3D grid
VIEW_ROWS = 3                # Vertical views of the 3D grid
VIEW_SPACING = 1             # Rear-pixel shift between neighbouring views
FLICKER_HZ = 30.0            # Critical flicker frequency assumed for the eye
REFRESH_HZ = 120.0

# === ANALYSIS ===
PSNR_CAP = 99.0              # dB reported for identical images
CONDITION_TILE = 16          # Superpixels per side of the conditioning tile
CONDITION_PAD = 2            # Panel pixels added beyond half the rear footprint
MAX_DENSE_ROWS = 4096        # Size guard for dense singular values
MAX_DENSE_COLS = 4096
RANK_DEFICIENT_RATIO = 1e-12
MTF_OVERSAMPLING = 4
MTF_MIN_SLANT = 2.0          # Degrees
MTF_MAX_SLANT = 10.0
MTF_EDGE_THRESHOLD = 1e-3    # Minimum derivative energy per row
WOBULATION_ITERS = 300
FACTOR_TOLERANCE = 1e-9      # sr_factor this close to an integer counts as one
SWEEP_CONDITIONING = "conditioning"
SWEEP_DISTANCE = "distance_psnr"
SWEEP_RANK = "rank_psnr"
SWEEP_FACTOR = "factor_psnr"
SWEEP_KINDS = (SWEEP_CONDITIONING, SWEEP_DISTANCE, SWEEP_RANK, SWEEP_FACTOR)
DEFAULT_DISTANCES = (0.3, 1.0, 2.0, 4.0, 6.0)
DEFAULT_SPREADS = (2.5, 5.0, 7.5, 10.0, 15.0, 20.0)
DEFAULT_RANKS = (1, 2, 4, 6, 8)
DEFAULT_FACTORS = (2.0, 3.0, 4.0)

# === CHARTS ===
CHART_SIZE = 96              # Default chart side in superpixels
EDGE_SLANT = 5.0             # Degrees
EDGE_LOW = 0.1
EDGE_HIGH = 0.9
CHECKER_CELL = 1

# === OUTPUT ===
PATTERN_BITS = 16
MANIFEST_NAME = "manifest.json"
DIAGNOSTICS_NAME = "diagnostics.csv"

# === EXIT CODES ===
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4
