"""
Django settings for the svbackend project.

The project has no web surface: it is a command-line toolkit whose
subcommands are the management commands of the `verification` app.
Every toolkit default lives in the VERIFICATION dictionary below and can be
overridden from the environment (or a .env file) with SV_<NAME>.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# Only used by Django internals; nothing here is signed or served.
SECRET_KEY = os.getenv('SV_SECRET_KEY', 'svbackend-insecure-local-key')

DEBUG = os.getenv('SV_DEBUG', 'false').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'verification',
]

# No persistence: every artifact is a file on disk.
DATABASES = {}

USE_TZ = True

TIME_ZONE = 'UTC'


def _env_float(name, default):
    return float(os.getenv(f'SV_{name}', default))


def _env_int(name, default):
    return int(os.getenv(f'SV_{name}', default))


VERIFICATION = {
    'TOP_N': _env_int('TOP_N', 40),
    'AAM_MARGIN': _env_float('AAM_MARGIN', 0.2),
    'AAM_SCALE': _env_float('AAM_SCALE', 30.0),
    'BATCH_SIZE': _env_int('BATCH_SIZE', 128),
    'ANCHORS_PER_BATCH': _env_int('ANCHORS_PER_BATCH', 16),
    'IMPOSTERS_PER_ANCHOR': _env_int('IMPOSTERS_PER_ANCHOR', 8),
    'UTTERANCES_PER_SPEAKER': _env_int('UTTERANCES_PER_SPEAKER', 1),
    'ENGLISH_WEIGHT': _env_float('ENGLISH_WEIGHT', 0.75),
    'LID_THRESHOLD': _env_float('LID_THRESHOLD', 0.0),
    'P_TARGET': _env_float('P_TARGET', 0.01),
    'C_MISS': _env_float('C_MISS', 1.0),
    'C_FA': _env_float('C_FA', 1.0),
    'SEED': _env_int('SEED', 0),
}


# Logging: key=value lines on stderr, one record per line.

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'keyvalue': {
            'format': 'level=%(levelname)s logger=%(name)s msg="%(message)s"',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'keyvalue',
        },
    },
    'loggers': {
        'verification': {
            'handlers': ['console'],
            'level': os.getenv('SV_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
