import csv
import json
from io import StringIO

import numpy as np
import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from wfpc.cli import main


def run(command, config, out, **options):
    stdout = StringIO()
    call_command(command, config=str(config), out=str(out), stdout=stdout, **options)
    return stdout.getvalue()


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


class TestSolveCommand:

    def test_solve_inactive(self, inactive_path, tmp_path):
        output = run('solve', inactive_path, tmp_path)
        assert 'Results written to' in output
        record = read_json(tmp_path / 'solve.json')
        assert record['schema'] == 'wfpc.solve/1'
        assert record['name'] == 'inactive'
        assert record['converged'] is True
        assert record['rounds'] == 1
        assert record['constraint_cost'] == 0.0
        assert record['leading_max'] is None, (
            'Нечисловые значения должны записываться как null'
        )
        assert record['transversality']['checked'] == 0
        assert len(record['history']) == 1
        psi = np.loadtxt(tmp_path / 'psi.dat')
        assert psi.shape == (51, 2)
        assert np.loadtxt(tmp_path / 'lip_t.dat').shape == (50, 2)
        for name in ('nu.dat', 'psi_dot.dat'):
            assert (tmp_path / name).is_file()

    def test_rerun_is_byte_identical(self, inactive_path, tmp_path):
        run('solve', inactive_path, tmp_path / 'first')
        run('solve', inactive_path, tmp_path / 'second')
        for name in ('solve.json', 'psi.dat', 'nu.dat'):
            first = (tmp_path / 'first' / name).read_bytes()
            second = (tmp_path / 'second' / name).read_bytes()
            assert first == second, f'Повторный запуск изменил {name}'

    def test_invalid_config(self, inactive_config, write_config, tmp_path):
        inactive_config['grid']['n_x'] = 4
        path = write_config(inactive_config)
        with pytest.raises(CommandError) as info:
            run('solve', path, tmp_path / 'out')
        assert 'grid.n_x' in str(info.value)
        assert not (tmp_path / 'out' / 'solve.json').exists()

    def test_missing_config(self, tmp_path):
        with pytest.raises(CommandError):
            run('solve', tmp_path / 'missing.json', tmp_path)

    def test_not_converged(self, active_config, write_config, tmp_path):
        active_config['solver']['max_rounds'] = 1
        path = write_config(active_config)
        with pytest.raises(CommandError) as info:
            run('solve', path, tmp_path)
        assert 'did not converge' in str(info.value)
        record = read_json(tmp_path / 'solve.json')
        assert record['converged'] is False, (
            'Результаты несошедшегося расчета все равно записываются'
        )

    def test_bad_jobs(self, inactive_path, tmp_path):
        with pytest.raises(CommandError):
            run('solve', inactive_path, tmp_path, jobs=-1)


class TestSweepCommand:

    def test_sweep_inactive(self, inactive_path, tmp_path):
        output = run('sweep', inactive_path, tmp_path)
        assert 'Feasible for eps <= 0.2' in output
        with open(tmp_path / 'sweep.csv', encoding='utf-8') as f:
            rows = list(csv.DictReader(f))
        assert [float(row['epsilon']) for row in rows] == [0.2, 0.1]
        assert all(row['error'] == '' for row in rows)
        record = read_json(tmp_path / 'sweep.json')
        assert record['schema'] == 'wfpc.sweep/1'
        assert record['threshold'] == [0.2, 0.2]
        assert len(record['points']) == 2


class TestSteerCommand:

    def test_steer_record(self, steer_path, tmp_path):
        try:
            run('steer', steer_path, tmp_path)
        except CommandError as error:
            assert 'Steering bound violated' in str(error)
        record = read_json(tmp_path / 'steer.json')
        assert record['schema'] == 'wfpc.steer/1'
        assert record['gain'] == pytest.approx(2 * record['threshold']), (
            'gain = 0 в конфигурации означает удвоенный порог'
        )
        assert len(record['runs']) == 3
        assert [item['seed'] for item in record['runs']] == [3, 4, 5]
        assert record['passed'] == all(item['passed'] for item in record['runs'])
        assert np.loadtxt(tmp_path / 'steer_psi.dat').shape == (401, 2)


class TestOracleCommand:

    def test_oracle_inactive(self, inactive_path, tmp_path):
        run('oracle', inactive_path, tmp_path)
        record = read_json(tmp_path / 'oracle.json')
        assert record['schema'] == 'wfpc.oracle/1'
        assert [drift['speed'] for drift in record['drifts']] == [0.0, 1.0]
        assert record['kinetic_grid'] == 0.0
        for speed in ('0', '1'):
            assert (tmp_path / f'w1_speed_{speed}.dat').is_file()


class TestCheckCommand:

    def test_check_inactive(self, inactive_path, tmp_path):
        output = run('check', inactive_path, tmp_path)
        assert 'ok inactive.mass' in output
        assert 'skip inactive.transversality' in output, (
            'Пропущенные проверки печатаются отдельно от пройденных'
        )
        record = read_json(tmp_path / 'check.json')
        assert record['schema'] == 'wfpc.check/1'
        assert record['passed'] is True
        assert [item['name'] for item in record['experiments']] == ['inactive']
        assert record['results'][0]['name'] == 'cole_hopf'


class TestConsoleScript:

    def test_usage(self, capsys):
        main([])
        output = capsys.readouterr().out
        assert output.startswith('usage: wfpc <command>')
        for command in ('solve', 'sweep', 'steer', 'oracle', 'check'):
            assert command in output
