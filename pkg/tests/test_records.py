import json
import math
from pathlib import Path

import numpy as np

from experiments.records import (
    ResultWriter,
    describe,
    envelope,
    sanitize,
    schema_id,
)


class TestSanitize:

    def test_non_finite_values(self):
        record = sanitize({
            'a': math.nan, 'b': [np.inf, 1.5], 'c': (np.float64(-np.inf),),
        })
        assert record == {'a': None, 'b': [None, 1.5], 'c': [None]}, (
            'NaN и бесконечности должны записываться как null'
        )

    def test_numpy_scalars(self):
        record = sanitize({
            'n': np.int64(3), 'x': np.float32(0.5), 'ok': np.bool_(True),
            'array': np.arange(3), 'path': Path('results'),
        })
        assert record == {
            'n': 3, 'x': 0.5, 'ok': True, 'array': [0, 1, 2], 'path': 'results'
        }
        assert type(record['n']) is int
        assert type(record['ok']) is bool


class TestRecords:

    def test_envelope_fields(self, inactive_experiment):
        record = envelope('solve', inactive_experiment, converged=True)
        assert record['schema'] == schema_id('solve') == 'wfpc.solve/1'
        assert record['config_hash'] == inactive_experiment.hash
        assert record['seed'] == 7
        assert record['grid'] == {
            'horizon': 0.5, 'n_t': 50, 'n_x': 32, 'length': 1.0
        }
        assert record['converged'] is True

    def test_describe_has_no_payload(self, inactive_experiment):
        assert set(describe(inactive_experiment)) == {
            'name', 'config_hash', 'seed', 'grid'
        }


class TestResultWriter:

    def test_json(self, results_dir):
        writer = ResultWriter(results_dir)
        path = writer.json('record.json', {'value': math.nan, 'rounds': 3})
        content = path.read_bytes()
        assert content.endswith(b'\n')
        assert json.loads(content) == {'value': None, 'rounds': 3}
        assert writer.written == [path]

    def test_csv(self, results_dir):
        writer = ResultWriter(results_dir)
        rows = [
            {'epsilon': 0.2, 'error': None, 'extra': 1},
            {'epsilon': 0.1, 'error': 'failed', 'extra': 2},
        ]
        path = writer.csv('sweep.csv', rows, ('epsilon', 'error'))
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines == ['epsilon,error', '0.2,', '0.1,failed']

    def test_series(self, results_dir):
        writer = ResultWriter(results_dir)
        times = np.linspace(0.0, 1.0, 5)
        path = writer.series('psi.dat', times, times ** 2, header='t psi')
        table = np.loadtxt(path)
        assert table.shape == (5, 2)
        assert np.allclose(table[:, 1], times ** 2)
        assert path.read_text().startswith('# t psi')
