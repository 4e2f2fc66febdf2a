"""
Django settings for the hardycalc project.

The project has no web surface and no database: Django provides the settings,
logging configuration and the management-command front end for the numerical
packages `processors` and `hardy`.
"""
import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent
SECRET_KEY = os.getenv('SECRET_KEY', 'hardycalc-local')
DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
ALLOWED_HOSTS: list[str] = []

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'hardy.apps.HardyConfig',
]

MIDDLEWARE: list[str] = []

DATABASES: dict = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

USE_I18N = False
USE_TZ = True
TIME_ZONE = 'UTC'

HARDY_LOG_LEVEL = os.getenv('HARDY_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'processors': {
            'handlers': ['console'],
            'level': HARDY_LOG_LEVEL,
            'propagate': False,
        },
        'hardy': {
            'handlers': ['console'],
            'level': HARDY_LOG_LEVEL,
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'INFO',
    },
}
