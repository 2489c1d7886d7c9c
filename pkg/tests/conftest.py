import os

import pytest

from app import create_app
from app.ml.competence import load_benchmark_fixture
from app.ml.lang_graph import load_graph_fixture
from app.ml.trainer_sim import load_scenario
from config import Config

FIXTURES_DIR = Config.FIXTURES_DIR
SCENARIOS_DIR = Config.SCENARIOS_DIR
CORPORA_DIR = Config.CORPORA_DIR


@pytest.fixture
def app(tmp_path):
    app = create_app('testing', OUTPUT_DIR=str(tmp_path / 'output'))
    with app.app_context():
        yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def related_graph():
    return load_graph_fixture(os.path.join(FIXTURES_DIR, 'related_sim.json'))


@pytest.fixture
def diverse_graph():
    return load_graph_fixture(os.path.join(FIXTURES_DIR, 'diverse_sim.json'))


@pytest.fixture
def related_benchmarks():
    return load_benchmark_fixture(os.path.join(FIXTURES_DIR, 'related_losses.json'), 'xxx-eng')


@pytest.fixture
def related_scenario():
    return load_scenario(os.path.join(SCENARIOS_DIR, 'related_m2o.json'))


@pytest.fixture
def toy_corpora():
    return os.path.join(CORPORA_DIR, 'toy_hrl.txt'), os.path.join(CORPORA_DIR, 'toy_lrl.txt')
