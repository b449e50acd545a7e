"""
Django settings for the secureSumLab project.

The project has no web surface: it hosts the ``securesum`` app, whose
management commands (run, sweep, montecarlo, verify) drive the protocol
simulator and the collusion analysis.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Nothing is signed or served; Django still insists on a key.
SECRET_KEY = os.environ.get('SECURESUM_SECRET_KEY', 'securesum-lab-not-a-secret')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'securesum',
]

# The simulator keeps all state in memory and in the files it writes.
DATABASES = {}


# Secure sum lab defaults; command-line flags and --config files override these.

SECURESUM = {
    'MODULUS': 2**61 - 1,
    'SEED': 0,
    'TRIALS': 10000,
    'CASES': 1000,
    'COALITION_SIZE': 2,
    'JOBS': None,  # os.cpu_count()
    'INFERENCE': 'linear',
    'SWEEP_MAX_N': 16,
    'VERIFY_MAX_LEAKAGE_N': 12,
}


# Logging goes to stderr so that command output stays byte-identical.

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'securesum': {
            'handlers': ['console'],
            'level': os.environ.get('SECURESUM_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}


# Internationalization
# https://docs.djangoproject.com/en/5.1/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True
