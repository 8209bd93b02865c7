import sys
from os.path import abspath, dirname, join

import pytest

root_dir = dirname(dirname(abspath(__file__)))
sys.path.append(root_dir)
infra_dir_path = join(root_dir, 'infra')
project_dir_path = join(root_dir, 'wfpc')
fixtures_dir_path = join(project_dir_path, 'experiments', 'fixtures')

pytest_plugins = [
    'tests.fixtures.fixture_grids',
    'tests.fixtures.fixture_configs',
]


@pytest.fixture
def results_dir(tmp_path):
    return tmp_path / 'results'
