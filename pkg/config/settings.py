"""
Django settings for the symmetry-breaking VQE project.

The project has no web surface and no database: Django provides the settings
layer, the management commands that drive experiments, form validation of
experiment configurations, and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""

import os
from decouple import config

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Only used by Django internals (signing); nothing here is served.
SECRET_KEY = config(
    "SECRET_KEY", default="vqe-local-only-3n!x0c*k2q#d7r9z1w8m4t6b5y0p"
)

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition

DJANGO_APPS = []

# Custom apps
PROJECT_APPS = [
    "core.apps.CoreConfig",
    "pauli.apps.PauliConfig",
    "statevector.apps.StatevectorConfig",
    "hamiltonians.apps.HamiltoniansConfig",
    "ansatz.apps.AnsatzConfig",
    "derivatives.apps.DerivativesConfig",
    "exact.apps.ExactConfig",
    "optimizer.apps.OptimizerAppConfig",
    "experiments.apps.ExperimentsConfig",
]

# Combine all apps
INSTALLED_APPS = DJANGO_APPS + PROJECT_APPS

# No database: runs are persisted as CSV/JSON files under VQE_OUTPUT_DIR.
DATABASES = {}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Internationalization
# https://docs.djangoproject.com/en/5.0/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True


# -----------------------------------
# Simulation limits

# plus_state() refuses larger registers; 2**24 amplitudes are 256 MiB.
VQE_MAX_QUBITS = config("VQE_MAX_QUBITS", default=24, cast=int)

# dense_ground() assembles the full 2**N x 2**N matrix.
DENSE_MAX_QUBITS = config("DENSE_MAX_QUBITS", default=12, cast=int)

# Derivative overlaps are streamed once P * 2**N * 16 bytes exceeds this.
FISHER_STREAM_BYTES = config("FISHER_STREAM_BYTES", default=4 * 2**30, cast=int)

# -----------------------------------
# Exact solver

LANCZOS_TOL = config("LANCZOS_TOL", default=1e-12, cast=float)
LANCZOS_MAX_ITER = config("LANCZOS_MAX_ITER", default=500, cast=int)
LANCZOS_FALLBACK_SEED = config("LANCZOS_FALLBACK_SEED", default=20210513, cast=int)
DEGENERACY_TOL = 1e-8

# -----------------------------------
# Experiment harness

VQE_OUTPUT_DIR = config("VQE_OUTPUT_DIR", default=os.path.join(BASE_DIR, "runs"))
VQE_JOBS = config("VQE_JOBS", default=1, cast=int)
DEFAULT_REPLICAS = 12

# Bumped whenever checkpoint.json changes shape.
FORMAT_VERSION = 1
# Parameter flattening order: block-major, layer-minor.
LAYOUT_ID = "block-major-v1"

RUN_SLOW_TESTS = config("RUN_SLOW_TESTS", default=False, cast=bool)

# LOGGING
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#logging
# See https://docs.djangoproject.com/en/dev/topics/logging for
# more details on how to customize your logging configuration.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(levelname)s %(asctime)s %(module)s "
            "%(process)d %(thread)d %(message)s"
        }
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        }
    },
    "root": {
        "level": config("VQE_LOG_LEVEL", default="INFO"),
        "handlers": ["console"],
    },
}
