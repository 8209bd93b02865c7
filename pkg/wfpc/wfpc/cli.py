"""Консольная утилита `wfpc`.

Вызывается как
    wfpc <command> --config <path> --out <dir> [--jobs N] [--seed S]
где <command> - одна из команд приложения experiments:
solve, sweep, steer, oracle, check.
"""
import os
import sys

EXPERIMENT_COMMANDS = ('solve', 'sweep', 'steer', 'oracle', 'check')


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'wfpc.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable?"
        ) from exc

    if not argv or argv[0] in ('-h', '--help'):
        sys.stdout.write(
            'usage: wfpc <command> --config <path> --out <dir> '
            '[--jobs N] [--seed S]\n'
            f'commands: {", ".join(EXPERIMENT_COMMANDS)}\n'
        )
        return
    execute_from_command_line(['wfpc', *argv])


if __name__ == '__main__':
    main()
