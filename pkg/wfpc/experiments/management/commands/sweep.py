from experiments.records import envelope
from experiments.serializers import SweepPointSerializer, SweepReportSerializer
from solver.penalized import epsilon_sweep

from ._base import ExperimentCommand

SWEEP_FIELDS = tuple(SweepPointSerializer().fields)


class Command(ExperimentCommand):
    """Развертка по (ε, δ): sweep.csv по строке на точку и сводка sweep.json.

    Точки считаются параллельно при --jobs > 1, порядок строк от этого
    не зависит. Ошибка решателя в точке попадает в колонку error.
    """
    help = 'Runs the penalized solver over a grid of (epsilon, delta)'

    def run(self, experiment, writer, jobs):
        options = experiment.section('sweep')
        report = epsilon_sweep(
            experiment.problem,
            options['epsilons'],
            options['deltas'],
            ctol=options['ctol'],
            pairing=options['pairing'],
            jobs=jobs,
        )
        data = SweepReportSerializer(report).data
        writer.csv('sweep.csv', data['points'], SWEEP_FIELDS)
        writer.json('sweep.json', envelope('sweep', experiment, **data))

        failed = sum(point.error is not None for point in report.points)
        if failed:
            self.stdout.write(self.style.WARNING(
                f'{failed} of {len(report.points)} points failed'
            ))
        if report.threshold is None:
            self.stdout.write(self.style.WARNING(
                f'No feasibility threshold at ctol={report.ctol:g}'
            ))
        else:
            epsilon, delta = report.threshold
            self.stdout.write(self.style.SUCCESS(
                f'Feasible for eps <= {epsilon:g}, delta <= {delta:g}'
            ))
