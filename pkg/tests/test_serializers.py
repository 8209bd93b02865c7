import copy
from io import BytesIO

import pytest
from django.core.management.base import CommandError

from experiments.checks import CheckResult
from experiments.configs import (
    first_error,
    load_experiment,
    parse_config,
    validate_config,
)
from experiments.serializers import (
    CheckResultSerializer,
    RoundRecordSerializer,
)
from solver.penalized import RoundRecord


def broken(config, section, **changes):
    config = copy.deepcopy(config)
    config[section].update(changes)
    return config


class TestExperimentSerializer:

    def test_valid_config(self, inactive_config):
        data = validate_config(inactive_config)
        assert data['name'] == 'inactive'
        assert data['solver']['max_rounds'] == 50
        assert data['solver']['tol_fp'] == 1e-8, (
            'Проверьте, что пропущенные поля секции получают значения по умолчанию'
        )
        assert data['constraint']['inner']['cosines'] == [[1, 1.0]]

    def test_optional_sections(self, steer_config):
        data = validate_config(steer_config)
        assert data['penalty'] == {'epsilon': 0.05, 'delta': 0.05}
        assert data['sweep']['deltas'] == data['sweep']['epsilons']
        assert data['particles']['gain'] == 0.0
        assert data['initial']['amplitude'] == 0.8

    def test_seed_override(self, inactive_config):
        assert validate_config(inactive_config, seed=42)['seed'] == 42

    @pytest.mark.parametrize('section, changes, field', [
        ('grid', {'n_x': 4}, 'grid.n_x'),
        ('grid', {'horizon': 0.0}, 'grid.horizon'),
        ('initial', {'kind': 'mode', 'mode': 0}, 'initial.mode'),
        ('initial', {'kind': 'mode', 'amplitude': 1.5}, 'initial.amplitude'),
        ('constraint', {'eta1': -1.0}, 'constraint.eta1'),
        ('constraint', {'kind': 'cubic'}, 'constraint.kind'),
        ('hamiltonian', {'kind': 'logcosh', 'drift': {}}, 'hamiltonian.drift'),
        ('sweep', {'epsilons': [0.1, 0.2]}, 'sweep.epsilons'),
        ('sweep', {'deltas': [0.1]}, 'sweep.deltas'),
    ])
    def test_first_invalid_field(self, inactive_config, section, changes, field):
        config = broken(inactive_config, section, **changes)
        with pytest.raises(CommandError) as info:
            validate_config(config)
        assert f'{field}:' in str(info.value), (
            f'Сообщение должно начинаться с пути к полю {field}: {info.value}'
        )

    def test_missing_section(self, inactive_config):
        config = copy.deepcopy(inactive_config)
        del config['grid']
        with pytest.raises(CommandError) as info:
            validate_config(config)
        assert 'grid:' in str(info.value)

    def test_negative_quadratic_weight(self, inactive_config):
        config = copy.deepcopy(inactive_config)
        config['running_cost'] = {
            'kind': 'quadratic', 'inner': {'cosines': [[1, 1.0]]}, 'weight': -1.0,
        }
        with pytest.raises(CommandError) as info:
            validate_config(config)
        assert 'running_cost.weight:' in str(info.value)

    def test_violated_initial_constraint(self, inactive_config):
        config = broken(inactive_config, 'constraint', offset=-0.1)
        with pytest.raises(CommandError) as info:
            validate_config(config)
        assert 'Psi(m0)' in str(info.value), (
            'Ограничение, нарушенное в начальный момент, должно отклоняться'
        )

    def test_small_growth_constant(self, inactive_config):
        config = broken(inactive_config, 'hamiltonian', growth_constant=1.0)
        with pytest.raises(CommandError) as info:
            validate_config(config)
        assert 'C0=1.0' in str(info.value)

    def test_logcosh_config(self, inactive_config):
        config = broken(
            inactive_config, 'hamiltonian', kind='logcosh', strength=0.5
        )
        data = validate_config(config)
        assert data['hamiltonian']['strength'] == 0.5


class TestConfigFiles:

    def test_load_experiment(self, inactive_path):
        experiment = load_experiment(inactive_path)
        assert experiment.name == 'inactive'
        assert experiment.seed == 7
        assert experiment.problem.space.n_x == 32
        assert experiment.problem.time.n_t == 50
        assert len(experiment.hash) == 64

    def test_hash_depends_on_config(self, inactive_path):
        first = load_experiment(inactive_path)
        second = load_experiment(inactive_path)
        assert first.hash == second.hash, 'Хеш конфигурации должен быть стабильным'
        assert load_experiment(inactive_path, seed=8).hash != first.hash
        assert first.with_seed(8).hash != first.hash

    def test_missing_file(self, tmp_path):
        with pytest.raises(CommandError):
            load_experiment(tmp_path / 'missing.json')

    def test_broken_json(self):
        with pytest.raises(CommandError):
            parse_config(BytesIO(b'{"name": '))

    def test_first_error_paths(self):
        errors = {'grid': {'n_x': ['too small']}, 'name': ['required']}
        assert first_error(errors) == 'grid.n_x: too small'
        assert first_error({'non_field_errors': ['bad']}) == 'bad'


class TestResultSerializers:

    def test_skipped_check(self):
        result = CheckResult.skipped('value_identity', 0.25, 'not converged')
        data = CheckResultSerializer(result).data
        assert data['passed'] is None, (
            'Пропущенная проверка записывается как passed = null'
        )
        assert data['limit'] is None
        assert data['detail'] == 'not converged'

    def test_round_record(self):
        record = RoundRecord(
            round=3, gap=1e-6, response_gap=2.5e-5, multiplier_change=0.1,
            exclusion=0.0, penalized_cost=-1.5, max_psi=0.01,
        )
        data = RoundRecordSerializer(record).data
        assert data['response_gap'] == 2.5e-5
        assert data['exclusion'] == 0.0
        assert set(data) == {
            'round', 'gap', 'response_gap', 'multiplier_change',
            'exclusion', 'penalized_cost', 'max_psi',
        }
