import numpy as np
from django.core.exceptions import ValidationError

from .functionals import convexity_probe
from .hamiltonian import validate_assumptions

CONVEXITY_ATOL = 1e-10


def hamiltonian_validator(spec, space, momentum_box=10.0, samples=201):
    """Отклоняет гамильтониан, нарушающий рост, оценку D_xH или выпуклость.

    Args:
        spec: гамильтониан каталога.
        space: пространственная сетка; узлы берутся как x-выборка.
        momentum_box: половина отрезка импульсов |p| ≤ P.
        samples: число точек по p.
    Returns:
        HamiltonianReport с найденными минимальными константами.
    Raises:
        ValidationError: хотя бы одно предположение не выполнено.
    """
    momenta = np.linspace(-momentum_box, momentum_box, samples)
    report = validate_assumptions(spec, space.nodes, momenta)
    if report.growth_required > spec.growth_constant:
        raise ValidationError(
            f'Константа роста C0={spec.growth_constant} меньше требуемой '
            f'{report.growth_required:.4g}.'
        )
    if report.lipschitz_required > spec.growth_constant:
        raise ValidationError(
            f'|D_xH| не ограничен величиной C0(1 + |p|): нужно C0 ≥ '
            f'{report.lipschitz_required:.4g}.'
        )
    if report.convexity_required > spec.convexity:
        raise ValidationError(
            f'Константа выпуклости mu={spec.convexity} меньше требуемой '
            f'{report.convexity_required:.4g}.'
        )
    return report


def constraint_validator(constraint, initial):
    """Ψ(m₀) < 0 и выпуклость Ψ на случайных парах мер."""
    value = constraint.psi(initial)
    if not value < 0:
        raise ValidationError(
            f'Ограничение должно строго выполняться в начальный момент: '
            f'Psi(m0) = {value:.4g}.'
        )
    gap = convexity_probe(constraint.psi, initial.grid)
    if gap > CONVEXITY_ATOL:
        raise ValidationError(
            f'Функционал ограничения не выпуклый: зазор {gap:.3e} '
            'на случайной паре мер.'
        )
