import os
import tempfile

from dotenv import load_dotenv

load_dotenv()

BASE_DIR = os.path.abspath(os.path.dirname(__file__))


def _int_list(value):
    return tuple(int(item) for item in value.split(',') if item.strip())


def _float_list(value):
    return tuple(float(item) for item in value.split(',') if item.strip())


class Config:
    APP_NAME = os.environ.get('APP_NAME', 'competence-curriculum')
    APP_VERSION = os.environ.get('APP_VERSION', '1.0.0')

    # Data Storage
    DATA_DIR = os.environ.get('DATA_DIR', os.path.join(BASE_DIR, 'app', 'data'))
    FIXTURES_DIR = os.environ.get('FIXTURES_DIR', os.path.join(DATA_DIR, 'fixtures'))
    SCENARIOS_DIR = os.environ.get('SCENARIOS_DIR', os.path.join(DATA_DIR, 'scenarios'))
    EXPERIMENTS_DIR = os.environ.get('EXPERIMENTS_DIR', os.path.join(DATA_DIR, 'experiments'))
    CORPORA_DIR = os.environ.get('CORPORA_DIR', os.path.join(DATA_DIR, 'corpora'))
    OUTPUT_DIR = os.environ.get('OUTPUT_DIR', os.path.join(BASE_DIR, 'output'))

    # Scheduler defaults
    DEFAULT_SCENARIO = os.environ.get('CCL_SCENARIO', 'related_m2o')
    VOCAB_K = int(os.environ.get('CCL_VOCAB_K', 1000))
    EVAL_INTERVAL = int(os.environ.get('CCL_EVAL_INTERVAL', 100))
    DEV_SAMPLE_SIZE = int(os.environ.get('CCL_DEV_SAMPLE_SIZE', 256))
    PATIENCE = int(os.environ.get('CCL_PATIENCE', 10))
    THRESHOLD = float(os.environ.get('CCL_THRESHOLD', 0.9))
    MAX_STEPS = int(os.environ.get('CCL_MAX_STEPS', 20000))
    TEMPERATURE = float(os.environ.get('CCL_TEMPERATURE', 5.0))

    # Experiment grid
    SEEDS = _int_list(os.environ.get('CCL_SEEDS', '7,8,9'))
    GRID_THRESHOLDS = _float_list(os.environ.get('CCL_GRID_THRESHOLDS', '0.5,0.6,0.7,0.8,0.9,1.0'))
    GRID_WORKERS = int(os.environ.get('CCL_GRID_WORKERS', 1))

    LOG_LEVEL = os.environ.get('CCL_LOG_LEVEL', 'INFO').upper()

    @staticmethod
    def init_app(app):
        os.makedirs(app.config['OUTPUT_DIR'], exist_ok=True)


class DevelopmentConfig(Config):
    DEBUG = True


class ProductionConfig(Config):
    DEBUG = False
    LOG_LEVEL = os.environ.get('CCL_LOG_LEVEL', 'WARNING').upper()


class TestingConfig(Config):
    TESTING = True
    OUTPUT_DIR = os.path.join(tempfile.gettempdir(), 'competence-curriculum-tests')
    SEEDS = (7,)


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
