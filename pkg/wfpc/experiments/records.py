"""Запись результатов: JSON через JSONRenderer, CSV, файлы рядов."""
import csv
import logging
import math
from pathlib import Path

import numpy as np
from rest_framework.renderers import JSONRenderer

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def schema_id(command):
    return f'wfpc.{command}/{SCHEMA_VERSION}'


def sanitize(value):
    """Числа numpy в python, нечисловые NaN/Inf в None, рекурсивно."""
    if isinstance(value, dict):
        return {key: sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    if isinstance(value, np.ndarray):
        return sanitize(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


def describe(experiment):
    """Имя, хеш конфигурации, seed и параметры сетки."""
    grid = experiment.data['grid']
    return {
        'name': experiment.name,
        'config_hash': experiment.hash,
        'seed': experiment.seed,
        'grid': {
            'horizon': grid['horizon'],
            'n_t': grid['n_t'],
            'n_x': grid['n_x'],
            'length': grid['length'],
        },
    }


def envelope(command, experiment, **payload):
    """Обязательные поля записи и содержимое команды."""
    record = {'schema': schema_id(command)}
    record.update(describe(experiment))
    record.update(payload)
    return record


class ResultWriter:
    """Пишет артефакты одной команды в каталог вывода."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.written = []

    def path(self, name):
        return self.directory / name

    def _remember(self, path):
        self.written.append(path)
        logger.debug('wrote %s', path)
        return path

    def json(self, name, record):
        path = self.path(name)
        content = JSONRenderer().render(
            sanitize(record), renderer_context={'indent': 2}
        )
        path.write_bytes(content + b'\n')
        return self._remember(path)

    def csv(self, name, rows, fieldnames):
        path = self.path(name)
        with path.open('w', newline='', encoding='utf-8') as stream:
            writer = csv.DictWriter(stream, fieldnames=fieldnames)
            writer.writeheader()
            for row in rows:
                writer.writerow({
                    key: '' if item is None else item
                    for key, item in sanitize(dict(row)).items()
                    if key in fieldnames
                })
        return self._remember(path)

    def series(self, name, times, values, header=''):
        """Двухколоночный файл t value, разделитель - пробел."""
        path = self.path(name)
        table = np.column_stack(
            [np.asarray(times, float), np.asarray(values, float)]
        )
        np.savetxt(path, table, fmt='%.12e', header=header)
        return self._remember(path)
