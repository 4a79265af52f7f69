SCHEMA_VERSION = 1

# dynamics
RK4_SUBSTEPS = 10
SKEW_FD_STEP = 1e-5
CHAIN_CHRISTOFFEL_STEP = 1e-6
JACOBIAN_RANK_TOL = 1e-9

# excitation
DEFAULT_HARMONICS = 5
DEFAULT_PERIOD = 10.0
DEFAULT_GRID_POINTS = 200
DENSE_GRID_FACTOR = 10
LOGDET_JITTER = 1e-9
MAX_REJECTION_SAMPLES = 1000

# mixture
EM_MAX_ITERATIONS = 500
EM_RELATIVE_TOL = 1e-7
COVARIANCE_FLOOR = 1e-8
DEFAULT_SUPPORT_POINTS = 20

# kernel regression
CHOLESKY_JITTER = 1e-10
VARIANCE_CLAMP_TOL = 1e-10

# observer
DEFAULT_FORGETTING = 0.02
DEFAULT_VB_ITERATIONS = 3
EMPIRICAL_NOISE_BOUNDS = (1e-8, 1e2)
IW_PRIOR_SCALE = 1e-4

# harness
TEST_FRACTION = 0.2
CSV_FLOAT_FORMAT = "%.17g"
