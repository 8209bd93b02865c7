from dataclasses import dataclass

import numpy as np
from django.core.management.base import CommandError

from experiments.records import envelope
from solver.functionals import linear_derivative
from solver.grid import GridMeasure
from solver.particles import (
    SteeringRun,
    sampling_noise,
    steering_flow,
    steering_threshold,
)

from ._base import ExperimentCommand

NOISE_MULTIPLE = 3.0


@dataclass(frozen=True, eq=False)
class SteeringCheck:
    """Итог одного seed: превышение границы и допуск по шуму."""
    seed: int
    run: SteeringRun
    noise: float

    @property
    def passed(self):
        return self.run.excess <= NOISE_MULTIPLE * self.noise

    def as_dict(self):
        return {
            'seed': self.seed,
            'max_psi': float(self.run.psi.max()),
            'excess': self.run.excess,
            'passed': self.passed,
        }


class Command(ExperimentCommand):
    """Поток частиц с дрейфом -C·D_mΨ по нескольким seed.

    gain = 0 в конфигурации означает удвоенный порог. Граница
    max(Ψ(m₀), -η₁) + 3·шум проверяется для каждого seed.
    """
    help = (
        'Runs the McKean-Vlasov steering flow '
        'and checks the constraint bound'
    )

    def run(self, experiment, writer, jobs):
        problem = experiment.problem
        options = experiment.section('particles')
        constraint, initial = problem.constraint, problem.initial
        threshold = steering_threshold(
            constraint, [initial, GridMeasure.uniform(problem.space)]
        )
        gain = options['gain'] or 2.0 * threshold
        count = options['count']
        gradient = linear_derivative(constraint.psi, initial)
        noise = sampling_noise(lambda x: gradient, initial, count)

        checks = []
        for offset in range(options['seeds']):
            seed = experiment.seed + offset
            run = steering_flow(
                constraint, gain, initial, count, seed, problem.time
            )
            checks.append(SteeringCheck(seed, run, noise))

        mean_psi = np.mean([check.run.psi for check in checks], axis=0)
        writer.series(
            'steer_psi.dat', problem.time.nodes, mean_psi, header='t psi'
        )
        passed = all(check.passed for check in checks)
        writer.json('steer.json', envelope(
            'steer', experiment,
            gain=gain,
            threshold=threshold,
            bound=checks[0].run.bound,
            noise=noise,
            tolerance=NOISE_MULTIPLE * noise,
            particles=count,
            passed=passed,
            runs=[check.as_dict() for check in checks],
        ))
        if not passed:
            failed = [check.seed for check in checks if not check.passed]
            raise CommandError(f'Steering bound violated for seeds {failed}')
        self.stdout.write(self.style.SUCCESS(
            f'Steering bound holds for {len(checks)} seeds (gain {gain:.4g})'
        ))
