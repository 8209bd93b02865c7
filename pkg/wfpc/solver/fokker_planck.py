"""Прямое уравнение Фоккера-Планка ∂_t m + div(αm) - Δm = 0.

Перенос - явный консервативный поток (upwind или центральный) с
подшагами по условию Куранта, диффузия - неявная. Матрица переноса
совпадает с транспонированным переносом линеаризованного HJB.
"""
import logging

import numpy as np

from .exceptions import NumericalFailure
from .grid import (
    MASS_ATOL,
    NEGATIVITY_ATOL,
    MeasurePath,
    d_dx,
    implicit_heat_solver,
    integrate,
    laplacian,
    substep_count,
)
from .hamiltonian import STENCILS
from .hjb import linear_step

logger = logging.getLogger(__name__)


def flux_divergence(alpha, density, space, stencil='upwind'):
    """(A m)_i - дискретная div(αm).

    upwind: F_{i+½} = α⁺_i m_i + α⁻_{i+1} m_{i+1};
    centered: (α_{i+1}m_{i+1} - α_{i-1}m_{i-1}) / 2dx.
    """
    if stencil == 'centered':
        flux = alpha * density
        return (np.roll(flux, -1) - np.roll(flux, 1)) / (2 * space.dx)
    if stencil != 'upwind':
        raise ValueError(
            f'unknown stencil {stencil!r}, expected one of {STENCILS}'
        )
    outgoing = np.maximum(alpha, 0.0) * density
    incoming = np.minimum(alpha, 0.0) * density
    face = outgoing + np.roll(incoming, -1)
    return (face - np.roll(face, 1)) / space.dx


def forward_step(alpha, density, space, dt, stencil='upwind', substeps=1):
    """D⁻¹(I - dt_s·A)^s m с замороженной скоростью α."""
    step = dt / substeps
    for _ in range(substeps):
        divergence = flux_divergence(alpha, density, space, stencil)
        density = density - step * divergence
    return implicit_heat_solver(space, dt)(density)


def solve_forward(alpha, initial, stencil='upwind', cfl=1.0):
    """Путь мер из m₀ под управлением α.

    Масса и знак плотности проверяются на каждом шаге.
    """
    time, space = alpha.time, alpha.space
    if initial.grid != space:
        raise ValueError('initial measure and control live on different grids')
    densities = np.empty((time.n_t + 1, space.n_x))
    densities[0] = initial.density
    mass = space.dx * densities[0].sum()
    for j in range(time.n_t):
        velocity = alpha.values[j]
        speed = float(np.abs(velocity).max())
        count = substep_count(time.dt, space.dx, speed, cfl)
        if count > 1:
            logger.debug('FP step %d sub-stepped %d times', j, count)
        following = forward_step(
            velocity, densities[j], space, time.dt, stencil, count
        )
        if not np.all(np.isfinite(following)):
            raise NumericalFailure('non-finite density in FP march', step=j)
        lowest = following.min()
        if lowest < -NEGATIVITY_ATOL:
            raise NumericalFailure(
                f'negative density {lowest:.3e} in FP march', step=j
            )
        following_mass = space.dx * following.sum()
        if abs(following_mass - mass) > MASS_ATOL:
            raise NumericalFailure(
                f'mass drift {following_mass - mass:.3e} in FP march', step=j
            )
        densities[j + 1] = following
        mass = following_mass
    return MeasurePath(time, space, densities)


def weak_form_residual(path, alpha, test, t1, t2):
    """|Σ dt ∫[∂_t φ + α·Dφ + Δφ] dm - (∫φ dm(t₂) - ∫φ dm(t₁))|."""
    time, space = path.time, path.space
    start, stop = time.index(t1), time.index(t2)
    if start > stop:
        raise ValueError(f't1 must not exceed t2, got {t1} > {t2}')
    total = 0.0
    for j in range(start, stop):
        following = test.values[j + 1]
        integrand = (
            (following - test.values[j]) / time.dt
            + alpha.values[j] * d_dx(following, space)
            + laplacian(following, space)
        )
        total += time.dt * integrate(path[j], integrand)
    change = (
        integrate(path[stop], test.values[stop])
        - integrate(path[start], test.values[start])
    )
    return abs(total - change)


def adjointness_check(alpha, space, dt, stencil='upwind', dual_stencil=None,
                      samples=8, seed=0):
    """max |⟨FP_step(m), u⟩ - ⟨m, HJB_linear_step(u)⟩| по случайным m, u.

    dual_stencil отличный от stencil дает заведомо несогласованную пару.
    """
    alpha = space.check(alpha, 'alpha')
    dual_stencil = dual_stencil or stencil
    generator = np.random.default_rng(seed)
    defect = 0.0
    for _ in range(samples):
        density = generator.random(space.n_x)
        values = generator.standard_normal(space.n_x)
        left = np.dot(forward_step(alpha, density, space, dt, stencil), values)
        dual = linear_step(alpha, values, space, dt, dual_stencil)
        right = np.dot(density, dual)
        defect = max(defect, abs(left - right))
    return defect
