import math

import numpy as np

from experiments.records import envelope
from solver.fokker_planck import solve_forward
from solver.functionals import Constant
from solver.grid import ControlField
from solver.oracles import drifted_heat
from solver.particles import ito_check, path_wasserstein, simulate_sde
from solver.penalized import solve_unconstrained

from ._base import ExperimentCommand


def catalog_functionals(problem):
    """Нетривиальные функционалы задачи для проверки формулы Ито."""
    candidates = (problem.constraint.psi, problem.running, problem.terminal)
    return [
        functional for functional in candidates
        if functional is not None
        and not isinstance(functional.outer, Constant)
    ]


class Command(ExperimentCommand):
    """Сверка частиц с сеткой.

    Для каждой постоянной скорости c из particles.drift_speeds:
    W₁ между эмпирическим и сеточным путем против огибающей
    a·N^{-1/2} + b·dx, сеточный путь против спектрального решения и
    дефект формулы Ито. Кинетическая цена безусловного решения
    сравнивается с оценкой Монте-Карло. Результаты только
    записываются: превышение огибающей отмечается в oracle.json.
    """
    help = 'Compares particle simulations with the grid solvers'

    def run(self, experiment, writer, jobs):
        problem = experiment.problem
        options = experiment.section('particles')
        time, space = problem.time, problem.space
        count = options['count']
        envelope_bound = (
            options['envelope_sampling'] / math.sqrt(count)
            + options['envelope_grid'] * space.dx
        )
        functionals = catalog_functionals(problem)

        drifts = []
        for speed in options['drift_speeds']:
            alpha = ControlField(
                time, space, np.full((time.n_t + 1, space.n_x), float(speed))
            )
            grid_path = solve_forward(alpha, problem.initial, problem.stencil)
            particles = simulate_sde(
                alpha, problem.initial, count, experiment.seed
            )
            distances = path_wasserstein(particles.path, grid_path)
            spectral = path_wasserstein(
                drifted_heat(problem.initial, time, speed), grid_path
            )
            ito = {
                functional.name or f'functional_{index}': ito_check(
                    functional, particles.path, alpha
                )
                for index, functional in enumerate(functionals)
            }
            drifts.append({
                'speed': speed,
                'w1_max': distances.max(),
                'envelope': envelope_bound,
                'within_envelope': bool((distances <= envelope_bound).all()),
                'spectral_w1_max': spectral.max(),
                'ito_defects': ito,
                'ito_passed': all(
                    defect <= options['ito_tolerance']
                    for defect in ito.values()
                ),
            })
            writer.series(
                f'w1_speed_{speed:g}.dat', time.nodes, distances, header='t w1'
            )

        solution = solve_unconstrained(problem)
        monte_carlo = simulate_sde(
            solution.control, problem.initial, count, experiment.seed,
            hamiltonian=problem.hamiltonian,
        )
        passed = all(
            item['within_envelope'] and item['ito_passed'] for item in drifts
        )
        writer.json('oracle.json', envelope(
            'oracle', experiment,
            particles=count,
            drifts=drifts,
            kinetic_grid=solution.cost.kinetic,
            kinetic_particles=monte_carlo.kinetic,
            kinetic_gap=abs(monte_carlo.kinetic - solution.cost.kinetic),
            passed=passed,
        ))
        style = self.style.SUCCESS if passed else self.style.WARNING
        self.stdout.write(style(
            f'Particle-grid comparison for {len(drifts)} drifts: '
            f'{"within" if passed else "outside"} tolerances'
        ))
