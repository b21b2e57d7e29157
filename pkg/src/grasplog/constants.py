"""Physical and algorithmic constants shared across the pipeline.

Every value that is a modelling choice (rather than derived geometry) lives
here so it can be echoed into dataset manifests for reproducibility.
"""

import math

# --- world / imaging ---------------------------------------------------------
EXTENT = 5.0                 # terrain side length [m]
DROP_ZONE = 3.0              # centered square where log centers are dropped [m]
CAMERA_HEIGHT = 5.0          # orthographic camera plane height [m]
DEFAULT_RESOLUTION = 256     # pixels per image side

# --- terrain (Perlin heightfield) --------------------------------------------
TERRAIN_OCTAVES = 4
TERRAIN_AMPLITUDE = 0.05     # [m]
TERRAIN_SCALE = 1.0          # base feature size [m]
TERRAIN_GRID_N = 65          # heightfield samples per side (bilinear between)

# --- logs --------------------------------------------------------------------
LOG_LENGTH_MEAN = 2.5        # [m]
LOG_LENGTH_STD = 0.2
LOG_LENGTH_RANGE = (1.8, 3.2)
LOG_DIAMETER_MEAN = 0.16     # [m]
LOG_DIAMETER_STD = 0.01
LOG_DIAMETER_RANGE = (0.12, 0.20)
LOG_DENSITY = 700.0          # [kg/m^3]
MAX_TILT = math.pi / 4       # hard bound on log tilt
INTERPENETRATION_TOL = 0.01  # allowed log/log overlap [m]
PLACEMENT_RETRIES = 50       # per-log retry budget during pile generation

# --- grapple geometry and trial model ----------------------------------------
W_MIN = 0.30                 # grasp width range [m]
W_MAX = 1.55
CLAW_BREADTH = 0.25          # claw extent along the log-axis direction [m]
CLAW_CORRIDOR = 0.06         # claw arm thickness used when planning [m]
CLAW_TIP = 0.01              # claw tip thickness used in trials [m]
CLAW_CLEARANCE = 0.05        # planned gap between claw and outermost log [m]
CLOSURE_CAPACITY = 0.12      # max total log cross-section area enclosed [m^2]
H_PENDULUM = 0.8             # effective pendulum length for balance [m]
COMPLIANCE_RANGE = 0.16      # max sideways give of the compliant grapple [m]
COMPLIANCE_STEP = 0.002      # search granularity for the give [m]

# --- candidate generation ----------------------------------------------------
ANGLE_OFFSETS_DEG = (0.0, 10.0, -10.0, 20.0, -20.0)
CENTER_SPACING = 0.10        # grasp-center sampling step along the pile axis [m]
CROSSING_END_MARGIN = 0.15   # min distance from a claw line crossing to a log end [m]
EXCLUSION_INFLATE_CLOSING = 0.15   # per-side widening of the non-target keep-out [m]
KEEPOUT_BREADTH = 0.51       # axial breadth of inflated keep-out / corridor checks [m]
MIN_CROSS_SIN = 0.2          # clamp on closing/axis skew when projecting widths

# --- candidate reduction -----------------------------------------------------
OVERLAP_THRESHOLD = 0.04     # grasp-rectangle overlap limit [m^2]

# --- grasp-map encoding ------------------------------------------------------
ENCODE_RECT_CLOSING = 0.20   # rectangle size along the closing direction [m]
ENCODE_RECT_AXIAL = 0.25     # rectangle size along the log-axis direction [m]
SENTINEL_C = 1.0             # values written where no grasp is encoded;
SENTINEL_S = 0.0             # documented as never read by losses or decoding
SENTINEL_W = 0.30
SENTINEL_B = 1.0

# --- quality functions -------------------------------------------------------
QUALITY_MU = 0.25
QUALITY_B_OPT = 1.0
QUALITY_SIGMA_B = 0.25
Q_MIN_DEFAULT = 0.5

# --- losses ------------------------------------------------------------------
LAMBDA_C = 30.0
LAMBDA_S = 30.0
LAMBDA_W = 60.0
LAMBDA_B = 120.0
GAMMA = 1.0 / 3.0
BCE_EPS = 1e-7

# --- file formats ------------------------------------------------------------
PILE_SCHEMA = "grasplog-pile-v1"
DATASET_SCHEMA = "grasplog-ds-v1"


def constants_block() -> dict:
    """All tunable constants as a plain dict, for embedding in manifests."""
    return {
        k: (list(v) if isinstance(v, tuple) else v)
        for k, v in sorted(globals().items())
        if k.isupper() and isinstance(v, (int, float, tuple, str))
    }
