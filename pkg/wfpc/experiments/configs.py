"""Чтение файла конфигурации эксперимента."""
import logging
from pathlib import Path

from django.core.management.base import CommandError
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser

from .catalog import Experiment, build_problem
from .serializers import ExperimentSerializer

logger = logging.getLogger(__name__)


def first_error(errors, prefix=''):
    """Первая ошибка сериализатора в виде 'section.field: сообщение'."""
    if isinstance(errors, dict):
        key, value = next(iter(errors.items()))
        if key == 'non_field_errors':
            return first_error(value, prefix)
        return first_error(value, f'{prefix}.{key}' if prefix else key)
    if isinstance(errors, (list, tuple)):
        return first_error(errors[0], prefix)
    return f'{prefix}: {errors}' if prefix else str(errors)


def parse_config(stream):
    """JSON из потока в словарь; синтаксические ошибки как CommandError."""
    try:
        return JSONParser().parse(stream)
    except ParseError as error:
        raise CommandError(f'Cannot parse config: {error.detail}') from error


def validate_config(data, seed=None):
    """Проверенный словарь конфигурации.

    Args:
        data: разобранный JSON.
        seed: если задан, заменяет seed из файла.
    Raises:
        CommandError: с путем к первому нарушенному полю.
    """
    if seed is not None and isinstance(data, dict):
        data = dict(data, seed=seed)
    serializer = ExperimentSerializer(data=data)
    if not serializer.is_valid():
        raise CommandError(f'Invalid config: {first_error(serializer.errors)}')
    return serializer.validated_data


def load_experiment(path, seed=None):
    """Experiment по пути к JSON-файлу."""
    path = Path(path)
    if not path.is_file():
        raise CommandError(f'Config file {path} does not exist')
    with path.open('rb') as stream:
        data = validate_config(parse_config(stream), seed)
    logger.info('loaded experiment %r from %s', data['name'], path)
    return Experiment(data=data, problem=build_problem(data), source=path)
