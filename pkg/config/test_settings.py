"""
Django settings for running tests.
Optimized for fast test execution.
"""

from .settings import *  # noqa: F401,F403

# Test database configuration - use in-memory SQLite for speed
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    }
}

# Logging - reduce log level for tests
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "level": "WARNING",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}

DEBUG = False

# Test-specific settings
TESTING = True
KSBOX_DEFAULT_SEED = 7
KSBOX_DEFAULT_ROUNDS = 20_000
KSBOX_RECORD_RUNS = False
