"""
Django settings for the rmps project.

Only the pieces a batch optimization tool needs are configured here: the
installed apps, logging and the RMPS defaults.  Every default can be
overridden from the environment (or a ``.env`` file) through
``python-decouple``.
"""

from pathlib import Path

from decouple import config

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='rmps-insecure-dev-secret-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS: list[str] = []

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'rmps',
]

# Experiments write CSV/PGM files, nothing is persisted in a database.
DATABASES: dict = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

USE_TZ = True
TIME_ZONE = 'UTC'

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

RMPS_LOG_LEVEL = config('RMPS_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'rmps': {
            'handlers': ['console'],
            'level': RMPS_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# ---------------------------------------------------------------------------
# RMPS defaults
# ---------------------------------------------------------------------------

RMPS_TUNING = {
    's_initial': config('RMPS_S_INITIAL', default=1.0, cast=float),
    'rho1': config('RMPS_RHO1', default=2.0, cast=float),
    'rho2': config('RMPS_RHO2', default=1.05, cast=float),
    'phi': config('RMPS_PHI', default=1e-6, cast=float),
    'max_iter': config('RMPS_MAX_ITER', default=50000, cast=int),
    'max_runs': config('RMPS_MAX_RUNS', default=1000, cast=int),
    'tol_fun': config('RMPS_TOL_FUN', default=1e-15, cast=float),
    'round_factor': config('RMPS_ROUND_FACTOR', default=6, cast=int),
}

RMPS_CONVEX_RHO = config('RMPS_CONVEX_RHO', default=4.0, cast=float)

RMPS_WORKERS = config('RMPS_WORKERS', default=1, cast=int)

RMPS_OUTPUT_DIR = config('RMPS_OUTPUT_DIR', default='results')

RMPS_SCAD_A = config('RMPS_SCAD_A', default=3.7, cast=float)
