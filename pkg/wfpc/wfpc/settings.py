import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'wfpc-local-experiments')

DEBUG = False

ALLOWED_HOSTS = []


INSTALLED_APPS = [
    'rest_framework',
    'solver.apps.SolverConfig',
    'experiments.apps.ExperimentsConfig',
]

# Проект не обслуживает запросы и не хранит данных в БД:
# результаты экспериментов пишутся в файлы.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


WFPC_OUTPUT_DIR = Path(os.getenv('WFPC_OUTPUT_DIR', BASE_DIR / 'results'))

WFPC_JOBS = int(os.getenv('WFPC_JOBS', 1))

WFPC_CHECK_FIXTURES = Path(
    os.getenv('WFPC_CHECK_FIXTURES', BASE_DIR / 'experiments' / 'fixtures')
)

WFPC_LOG_LEVEL = os.getenv('WFPC_LOG_LEVEL', 'INFO')


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
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
        'solver': {
            'handlers': ['console'],
            'level': WFPC_LOG_LEVEL,
        },
        'experiments': {
            'handlers': ['console'],
            'level': WFPC_LOG_LEVEL,
        },
    },
}


REST_FRAMEWORK = {
    'STRICT_JSON': True,
    'COERCE_DECIMAL_TO_STRING': False,
}
