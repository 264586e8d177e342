"""
Settings for the MCDA benchmark project.

Every tunable is read from the environment (optionally through a .env file)
and falls back to the protocol defaults.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

DEBUG = os.getenv('MCDA_DEBUG', 'False') == 'True'
LOG_LEVEL = os.getenv('MCDA_LOG_LEVEL', 'DEBUG' if DEBUG else 'INFO').upper()

# Where scripts/generate_datasets.py writes its CSV files
DATA_DIR = Path(os.getenv('MCDA_DATA_DIR', str(BASE_DIR / 'data')))

# Evaluation protocol (5-fold CV, knn = 3, inner 3-fold tuning)
DEFAULT_KNN = int(os.getenv('MCDA_DEFAULT_KNN', '3'))
DEFAULT_FOLDS = int(os.getenv('MCDA_DEFAULT_FOLDS', '5'))
INNER_FOLDS = int(os.getenv('MCDA_INNER_FOLDS', '3'))
DEFAULT_SEED = int(os.getenv('MCDA_DEFAULT_SEED', '0'))

# Eigenvalues below RANK_CUTOFF * largest eigenvalue count as zero
RANK_CUTOFF = float(os.getenv('MCDA_RANK_CUTOFF', '1e-10'))

# Gradient descent defaults
MAX_ITERATIONS = int(os.getenv('MCDA_MAX_ITERATIONS', '1000'))
OBJECTIVE_TOLERANCE = float(os.getenv('MCDA_OBJECTIVE_TOLERANCE', '1e-6'))
# Constrained gradient norm, relative to J, required before a run counts as converged
GRADIENT_TOLERANCE = float(os.getenv('MCDA_GRADIENT_TOLERANCE', '1e-3'))
REORTHONORMALIZE_EVERY = int(os.getenv('MCDA_REORTHONORMALIZE_EVERY', '5'))

# Gamma grid: powers of ten between the two exponents (inclusive)
GAMMA_GRID_MIN_EXP = int(os.getenv('MCDA_GAMMA_GRID_MIN_EXP', '-10'))
GAMMA_GRID_MAX_EXP = int(os.getenv('MCDA_GAMMA_GRID_MAX_EXP', '10'))
