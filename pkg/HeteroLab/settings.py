"""
Django settings for the HeteroLab project.

HeteroLab trains heteroscedastic Normal/Student regression models with the
faithful optimization scheme, runs the evaluation protocol around them and
certifies bit-level agreement with the mean-only baseline.
"""

from pathlib import Path
from decouple import config, Csv

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='heterolab-local-key-change-this-in-production')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=Csv())

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    'rest_framework',
    'django_filters',

    'autodiff',
    'networks',
    'losses',
    'optim',
    'predictive',
    'metrics',
    'datasets',
    'experiments',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'HeteroLab.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'HeteroLab.wsgi.application'

# Database (experiment run records)
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': config('DATABASE_PATH', default=str(BASE_DIR / 'db.sqlite3')),
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Django REST Framework Configuration
REST_FRAMEWORK = {
    'DEFAULT_FILTER_BACKENDS': [
        'django_filters.rest_framework.DjangoFilterBackend',
        'rest_framework.filters.SearchFilter',
        'rest_framework.filters.OrderingFilter',
    ],
    'DEFAULT_PAGINATION_CLASS': 'rest_framework.pagination.PageNumberPagination',
    'PAGE_SIZE': 20,
    'DEFAULT_AUTHENTICATION_CLASSES': [
        'rest_framework.authentication.SessionAuthentication',
    ],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
}

# ============================================================
# EXPERIMENT DEFAULTS
# ============================================================
# Every key can be overridden from the environment or a .env file,
# then per run from an experiment config file and CLI flags.
HETEROLAB = {
    'ECE_BINS': config('HETEROLAB_ECE_BINS', default=10, cast=int),
    'MEMBERS': config('HETEROLAB_MEMBERS', default=10, cast=int),
    'DROPOUT_RATE': config('HETEROLAB_DROPOUT_RATE', default=0.1, cast=float),
    'LEARNING_RATE': config('HETEROLAB_LEARNING_RATE', default=1e-3, cast=float),
    'ADAM_BETA1': config('HETEROLAB_ADAM_BETA1', default=0.9, cast=float),
    'ADAM_BETA2': config('HETEROLAB_ADAM_BETA2', default=0.999, cast=float),
    'ADAM_EPSILON': config('HETEROLAB_ADAM_EPSILON', default=1e-7, cast=float),
    'FOLDS': config('HETEROLAB_FOLDS', default=10, cast=int),
    'SEEDS': config('HETEROLAB_SEEDS', default='0', cast=Csv(int)),
    'OUTPUT_DIR': config('HETEROLAB_OUTPUT_DIR', default=str(BASE_DIR / 'results')),
    'NOISE_MODE': config('HETEROLAB_NOISE_MODE', default='std'),
    'STANDARDIZATION': config('HETEROLAB_STANDARDIZATION', default='fold'),
    'SIGNIFICANCE_LEVEL': config('HETEROLAB_SIGNIFICANCE_LEVEL', default=0.05, cast=float),
}

# ============================================================
# CELERY (worker pool for (dataset, fold, model) jobs)
# ============================================================
# Eager by default: jobs run in-process, in submission order.
CELERY_BROKER_URL = config('CELERY_BROKER_URL', default='memory://')
CELERY_RESULT_BACKEND = config('CELERY_RESULT_BACKEND', default='cache+memory://')
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'

# Logging Configuration
LOGS_DIR = Path(config('HETEROLAB_LOGS_DIR', default=str(BASE_DIR / 'logs')))

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': config('HETEROLAB_CONSOLE_LOG_LEVEL', default='INFO'),
            'class': 'logging.StreamHandler',
            'formatter': 'simple'
        },
        'file': {
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'heterolab.log',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': True,
        },
        **{
            app: {
                'handlers': ['console', 'file'],
                'level': config('HETEROLAB_LOG_LEVEL', default='INFO'),
                'propagate': False,
            }
            for app in (
                'autodiff', 'networks', 'losses', 'optim',
                'predictive', 'metrics', 'datasets', 'experiments',
            )
        },
    },
}

# Create logs directory if it doesn't exist
if not LOGS_DIR.exists():
    LOGS_DIR.mkdir(parents=True, exist_ok=True)
