"""Lab configuration and constants"""

from pathlib import Path


def _load_version():
    try:
        return Path(__file__).with_name("VERSION").read_text(encoding="utf-8").strip() or "0.0.0"
    except Exception:
        return "0.0.0"


LAB_VERSION = _load_version()

# Enumeration settings
DIRECT_COUNT_LIMIT = 10**6  # u^r above this switches count_N to Smith-form counting
DEFAULT_ENTRY_BOUND = 1
DEFAULT_U_MAX = 1

# Sampling settings
DEFAULT_PRIME = 1000003  # 10^6 + 3
MIN_HECKE_PRIME = 10**5
DET_TOLERANCE = 1e-9  # relative tolerance on |det(basis)| = 1
LLL_DELTA = 0.99
LLL_ETA = 0.51
FIXED_POINT_BITS = 30  # grid for the integer copy of non-integral bases handed to fplll
ENUMERATION_SLACK = 1e-6  # relative slack on the squared enumeration bound
NODE_BUDGET = 5_000_000  # points per ball enumeration
MAX_DIMENSION = 32
MEMBERSHIP_TOLERANCE = 1e-6
NORM_TOLERANCE = 1e-12  # relative slack on ball boundaries

# Truncation defaults
DEFAULT_T_MAX = 10
DEFAULT_ELL_BOUND = 10
DEFAULT_E_MAX = 10_000
MC_SAMPLES = 20_000
MC_SEED = 20240611
COEFFICIENT_FLOOR = 1e-15  # aggregated centered coefficients below this are dropped
CENTERED_FULL_K = 5  # above this, main_only centered moments skip the full family expansion

# Experiment settings
DEFAULT_SAMPLES = 2000
DEFAULT_SEED = 1
SEED_ENV_VAR = "ROGERS_LAB_SEED"
CHUNK_SIZE = 250  # samples per work unit; fixed so reductions do not depend on worker count
DEFAULT_WORKERS = 1
DEFAULT_T_GRID = (0.25, 0.5, 1.0)
DEFAULT_LEVELS = (1, 2)
DEFAULT_N_POINTS = 5
MOMENT_ORDER = 8  # central moments tracked by RunningMoments
CLT_MOMENT_ORDER = 12  # standard errors of E[Z^6] need moments up to 12
SE_BAND = 4.0  # pass bands are this many standard errors plus residual

# Acceptance bands (desk-scale proximity for the d -> infinity limits)
CLT_BANDS = {
    "mean": 0.1,
    "variance": 0.15,
    "m4": 0.6,
    "ks": 0.05,
}
GAP_MEAN_RELATIVE_BAND = 0.10
TREND_RELATIVE_BAND = 0.25

# Output settings
OUTPUT_FORMATS = ("json", "csv", "table")
DEFAULT_FORMAT = "json"
TABLE_FLOAT_DIGITS = 6

# Logging
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVEL = "WARNING"
