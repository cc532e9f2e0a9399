"""
Django settings for eventprivacy project.

The project hosts the event-log anonymization pipeline: the ``eventlogs`` app
(ingestion, DAFSA) and the ``anonymization`` app (risk calibration,
oversampling, time noise, reporting, CLI).

For the full list of settings and their values, see
https://docs.djangoproject.com/en/6.0/ref/settings/
"""

from decouple import config, Csv
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-eventprivacy-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost', cast=Csv())


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'eventlogs',
    'anonymization',
]


# Database
# https://docs.djangoproject.com/en/6.0/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': config('DB_ENGINE', default='django.db.backends.sqlite3'),
        'NAME': config('DB_NAME', default=str(BASE_DIR / 'db.sqlite3')),
        'USER': config('DB_USER', default=''),
        'PASSWORD': config('DB_PASSWORD', default=''),
        'HOST': config('DB_HOST', default=''),
        'PORT': config('DB_PORT', default=''),
    }
}


# Internationalization
# https://docs.djangoproject.com/en/6.0/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/6.0/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# REST Framework Configuration (serializers only; no API is served)
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'COERCE_DECIMAL_TO_STRING': False,
}


# Logging
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'standard',
        },
    },
    'loggers': {
        'eventlogs': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'anonymization': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


# Event log anonymization defaults (CLI flags override these)
EVENT_LOG_ANONYMIZATION = {
    'DELTA': config('ANONYMIZATION_DELTA', default=0.2, cast=float),
    'PRECISION': config('ANONYMIZATION_PRECISION', default=0.1, cast=float),
    'TIME_UNIT': config('ANONYMIZATION_TIME_UNIT', default='hours'),
    'SEED': config('ANONYMIZATION_SEED', default=0, cast=int),
    'EPSILON_CAP': config('ANONYMIZATION_EPSILON_CAP', default=50.0, cast=float),
    'CSV_COLUMNS': config('ANONYMIZATION_CSV_COLUMNS', default='case,activity,timestamp', cast=Csv(post_process=tuple)),
    'THREADS': config('ANONYMIZATION_THREADS', default=1, cast=int),
}
