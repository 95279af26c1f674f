"""
Django settings for the ksbox-lab project.
"""

import os
from pathlib import Path

import dj_database_url
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used for signing; the project serves no requests.
SECRET_KEY = config("SECRET_KEY", default="ksbox-lab-local-key")

DEBUG = config("DEBUG", default=True, cast=bool)

ALLOWED_HOSTS: list[str] = []

# Application definition
INSTALLED_APPS = [
    "django.contrib.contenttypes",
    # Local apps
    "nsboxes",
    "chartsim",
    "ncycle",
    "cvchain",
    "reduction",
    "core",
]

# Database configuration (run records only)
if "DATABASE_URL" in os.environ:
    DATABASES = {
        "default": dj_database_url.parse(
            os.environ.get("DATABASE_URL"),
            conn_max_age=600,
        )
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "ksbox.db",
        }
    }

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Computation defaults
KSBOX_VERSION = "0.1.0"
KSBOX_DEFAULT_SEED = config("KSBOX_DEFAULT_SEED", default=20190101, cast=int)
KSBOX_DEFAULT_ROUNDS = config("KSBOX_DEFAULT_ROUNDS", default=100_000, cast=int)
KSBOX_FLOAT_DIGITS = config("KSBOX_FLOAT_DIGITS", default=12, cast=int)
KSBOX_FLOAT_TOL = config("KSBOX_FLOAT_TOL", default=1e-12, cast=float)
KSBOX_EIGEN_TOL = config("KSBOX_EIGEN_TOL", default=1e-12, cast=float)
KSBOX_AGREEMENT_TOL = config("KSBOX_AGREEMENT_TOL", default=1e-12, cast=float)
KSBOX_RECORD_RUNS = config("KSBOX_RECORD_RUNS", default=False, cast=bool)

# Logging Configuration
LOG_DIR = BASE_DIR / "logs"
LOG_DIR.mkdir(exist_ok=True)

KSBOX_LOG_LEVEL = config("KSBOX_LOG_LEVEL", default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {process:d} {thread:d} {message}",
            "style": "{",
        },
        "simple": {
            "format": "{levelname} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": "WARNING",
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "file": {
            "level": "INFO",
            "class": "logging.handlers.RotatingFileHandler",
            "filename": str(LOG_DIR / "ksbox.log"),
            "maxBytes": 1024 * 1024 * 15,  # 15MB
            "backupCount": 10,
            "formatter": "verbose",
        },
        "error_file": {
            "level": "ERROR",
            "class": "logging.handlers.RotatingFileHandler",
            "filename": str(LOG_DIR / "errors.log"),
            "maxBytes": 1024 * 1024 * 15,  # 15MB
            "backupCount": 10,
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console", "file"],
        "level": "INFO",
    },
    "loggers": {
        "django": {
            "handlers": ["console", "file"],
            "level": os.getenv("DJANGO_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
        **{
            app: {
                "handlers": ["console", "file", "error_file"] if app == "core" else ["console", "file"],
                "level": KSBOX_LOG_LEVEL,
                "propagate": False,
            }
            for app in ("nsboxes", "chartsim", "ncycle", "cvchain", "reduction", "core")
        },
    },
}
