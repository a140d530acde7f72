import os
from dotenv import load_dotenv
from pathlib import Path

# Load environment overrides from src/config.env
src_dir = Path(__file__).parent.parent / 'src'
load_dotenv(src_dir / 'config.env')

# Numeric tolerances
ABS_TOL = 1e-9  # absolute tolerance for cost comparisons
REL_TOL = 1e-7  # relative tolerance for cost comparisons
WITNESS_TOL = 1e-6  # re-validation of reported values against their witness tuple

# LP core
LP_FEAS_TOL = 1e-7
LP_OPT_TOL = 1e-7
LP_PIVOT_TOL = 1e-9
LP_MAX_PIVOTS = int(os.getenv('KADAPT_LP_MAX_PIVOTS', str(10**6)))

# MIP core
MIP_INT_TOL = 1e-6
MIP_GAP_TOL = 1e-6
MIP_NODE_LIMIT = int(os.getenv('KADAPT_MIP_NODE_LIMIT', str(10**6)))

# Enumeration and brute force limits
ENUM_OUTPUT_CAP = 10**7
BRUTE_FORCE_SOLUTION_CAP = 5000
BRUTE_FORCE_TUPLE_CAP = 10**7

# Local search heuristic
X_STEP_TIME_LIMIT = float(os.getenv('KADAPT_X_STEP_TIME_LIMIT', '300'))  # seconds per x-step
LS_IMPROVEMENT_TOL = 1e-9

# Spatial branch-and-bound (k=2)
BB2_EPS_ALPHA = 1e-9
BB2_TIME_LIMIT = float(os.getenv('KADAPT_BB2_TIME_LIMIT', '7200'))

# Enumerative algorithm
IT_DEFAULT_Q = 2
IT_TIME_LIMIT = float(os.getenv('KADAPT_IT_TIME_LIMIT', '7200'))
IT_MEMORY_CAP = int(os.getenv('KADAPT_IT_MEMORY_CAP', '2000000'))  # max stored solutions

# Dual grid oracle
DUAL_ORACLE_GRID = 20

# Instance generation
GENERATOR_MAX_ATTEMPTS = 100
COST_SCALE = 1000

# Benchmark harness
KADAPT_THREADS = int(os.getenv('KADAPT_THREADS', str(os.cpu_count() or 1)))
BENCH_TIME_LIMIT = float(os.getenv('KADAPT_BENCH_TIME_LIMIT', '600'))

# Logging
LOG_LEVEL = os.getenv('KADAPT_LOG_LEVEL', 'INFO')
LOG_DIR = os.getenv('KADAPT_LOG_DIR', 'logs')
