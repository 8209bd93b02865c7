from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from experiments.configs import load_experiment
from experiments.records import ResultWriter
from solver.exceptions import SolverError


class ExperimentCommand(BaseCommand):
    """Общая часть команд эксперимента.

    Все команды вызываются одинаково:
        wfpc <command> --config <path> --out <dir> [--jobs N] [--seed S]
    Числовые параметры задачи берутся только из файла конфигурации.
    """
    requires_system_checks = []
    config_required = True

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            type=Path,
            required=self.config_required,
            help='JSON-файл конфигурации эксперимента'
        )
        parser.add_argument(
            '--out',
            type=Path,
            help='Каталог для результатов, по умолчанию WFPC_OUTPUT_DIR'
        )
        parser.add_argument(
            '--jobs',
            type=int,
            help='Число рабочих процессов, по умолчанию WFPC_JOBS'
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Заменяет seed из конфигурации'
        )

    def handle(self, *args, **options):
        jobs = options['jobs'] or settings.WFPC_JOBS
        if jobs < 1:
            raise CommandError(f'--jobs must be positive, got {jobs}')
        writer = ResultWriter(options['out'] or settings.WFPC_OUTPUT_DIR)
        self.execute_experiment(options, writer, jobs)
        self.stdout.write(self.style.SUCCESS(
            f'Results written to {writer.directory}'
        ))

    def execute_experiment(self, options, writer, jobs):
        experiment = load_experiment(options['config'], options['seed'])
        try:
            self.run(experiment, writer, jobs)
        except SolverError as error:
            raise CommandError(f'Solver failed: {error}') from error

    def run(self, experiment, writer, jobs):
        raise NotImplementedError(
            'subclasses of ExperimentCommand must provide a run() method'
        )
