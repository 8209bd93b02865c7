"""Сборка объектов решателя из проверенной конфигурации."""
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from solver.functionals import (
    ConstraintSpec,
    FourierSeries,
    SmoothPlus,
    constant_functional,
    linear_functional,
    quadratic_functional,
)
from solver.grid import GridMeasure, SpaceGrid, TimeGrid
from solver.hamiltonian import LogCoshHamiltonian, QuadraticHamiltonian
from solver.penalized import ControlProblem

SMOOTHING_FLOOR = 1e-12


def build_series(data, length):
    if data is None:
        return FourierSeries(length=length)
    return FourierSeries(
        constant=data['constant'],
        cosines=tuple(tuple(pair) for pair in data['cosines']),
        sines=tuple(tuple(pair) for pair in data['sines']),
        length=length,
        time_slope=data['time_slope'],
    )


def build_functional(data, length, name=''):
    if data is None:
        return None
    if data['kind'] == 'constant':
        return constant_functional(data['value'], name)
    series = build_series(data['inner'], length)
    if data['kind'] == 'linear':
        return linear_functional(series, data['weight'], data['offset'], name)
    return quadratic_functional(series, data['weight'], data['target'], name)


def build_hamiltonian(data, length):
    potential = build_series(data.get('potential'), length)
    if data['kind'] == 'logcosh':
        return LogCoshHamiltonian(
            strength=data['strength'],
            potential=potential,
            growth_constant=data['growth_constant'],
            convexity=data.get('convexity'),
        )
    return QuadraticHamiltonian(
        drift=build_series(data.get('drift'), length),
        potential=potential,
        growth_constant=data['growth_constant'],
        convexity=data.get('convexity', 1.0),
    )


def build_initial(data, space):
    """uniform; bump - периодическая гауссиана; mode - 1 + a·cos(2πkx/L)."""
    x = space.nodes
    if data['kind'] == 'uniform':
        return GridMeasure.uniform(space)
    if data['kind'] == 'bump':
        phase = 2j * np.pi * (x - data['center']) / space.length
        distance = np.angle(np.exp(phase))
        distance *= space.length / (2 * np.pi)
        return GridMeasure.from_weights(
            space, np.exp(-0.5 * (distance / data['width']) ** 2)
        )
    weights = 1.0 + data['amplitude'] * np.cos(
        2 * np.pi * data['mode'] * x / space.length
    )
    return GridMeasure.from_weights(space, weights)


def build_problem(data):
    """ControlProblem по проверенному словарю конфигурации.

    Ширина сглаживания h = solver.smoothing·|Ψ(m₀)|.
    """
    grid = data['grid']
    time = TimeGrid(grid['horizon'], grid['n_t'])
    space = SpaceGrid(grid['n_x'], grid['length'])
    length = space.length
    initial = build_initial(data['initial'], space)
    constraint_data = data['constraint']
    constraint = ConstraintSpec(
        psi=build_functional(constraint_data, length, 'psi'),
        eta1=constraint_data['eta1'],
        eta2=constraint_data['eta2'],
    )
    solver = data['solver']
    scale = max(abs(constraint.psi(initial)), SMOOTHING_FLOOR)
    return ControlProblem(
        time=time,
        space=space,
        hamiltonian=build_hamiltonian(data['hamiltonian'], length),
        constraint=constraint,
        initial=initial,
        running=build_functional(data.get('running_cost'), length, 'f'),
        terminal=build_functional(data.get('terminal_cost'), length, 'g'),
        smoothing=SmoothPlus(solver['smoothing'] * scale),
        stencil=solver['stencil'],
        tol_fp=solver['tol_fp'],
        tol_lambda=solver['tol_lambda'],
        max_rounds=solver['max_rounds'],
        q_modes=solver['q_modes'],
    )


def canonical(data):
    """Приводит проверенные данные к обычным dict/list для хеширования."""
    return json.loads(json.dumps(data, sort_keys=True))


def config_hash(data):
    payload = json.dumps(
        canonical(data), sort_keys=True, separators=(',', ':')
    )
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


@dataclass(frozen=True, eq=False)
class Experiment:
    data: dict
    problem: ControlProblem
    source: Path = None

    @property
    def name(self):
        return self.data['name']

    @property
    def seed(self):
        return self.data['seed']

    @property
    def hash(self):
        return config_hash(self.data)

    def section(self, name):
        return self.data[name]

    def with_seed(self, seed):
        data = dict(self.data, seed=seed)
        return Experiment(data, self.problem, self.source)
