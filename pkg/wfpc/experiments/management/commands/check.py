from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from experiments.checks import all_passed, run_suite
from experiments.configs import load_experiment
from experiments.records import describe, schema_id
from experiments.serializers import CheckResultSerializer

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    """Полный набор инвариантов на задачах каталога.

    --config принимает файл или каталог; без него берутся все *.json
    из WFPC_CHECK_FIXTURES. Заменяет встроенную команду Django `check`:
    проект не использует системные проверки.
    """
    help = 'Runs the invariant suite on catalog problems'
    config_required = False

    def execute_experiment(self, options, writer, jobs):
        source = Path(options['config'] or settings.WFPC_CHECK_FIXTURES)
        paths = sorted(source.glob('*.json')) if source.is_dir() else [source]
        if not paths:
            raise CommandError(f'No catalog configs found in {source}')
        experiments = [
            load_experiment(path, options['seed']) for path in paths
        ]

        results = run_suite(experiments)
        passed = all_passed(results)
        writer.json('check.json', {
            'schema': schema_id('check'),
            'experiments': [describe(item) for item in experiments],
            'passed': passed,
            'results': CheckResultSerializer(results, many=True).data,
        })
        for result in results:
            if result.passed is None:
                self.stdout.write(self.style.WARNING(
                    f'skip {result.name}: {result.detail}'
                ))
                continue
            style = self.style.SUCCESS if result.passed else self.style.ERROR
            self.stdout.write(style(
                f'{"ok" if result.passed else "FAIL"} {result.name}'
            ))
        if not passed:
            failed = sum(result.failed for result in results)
            raise CommandError(f'{failed} of {len(results)} checks failed')
