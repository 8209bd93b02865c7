"""Обратное уравнение Гамильтона-Якоби-Беллмана

    -∂_t u + H(x, Du) - Δu = ψ,   u(T) = g̃.

Основной решатель работает с v = u - ∫_t^T ψ ds и накопленными суммами
источника, поэтому разрывный по времени ψ не портит схему. Второй
решатель - итерации Пикара через тепловую полугруппу со срезанным
гамильтонианом.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import NonContractionError, NumericalFailure
from .grid import (
    ControlField,
    ValueField,
    d_dx,
    heat_semigroup,
    implicit_heat_solver,
    laplacian,
    spectral_derivative,
    substep_count,
)
from .hamiltonian import STENCILS, numerical_hamiltonian

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HjbProblem:
    hamiltonian: object
    source: ValueField
    terminal: np.ndarray
    stencil: str = 'upwind'
    cfl: float = 1.0

    def __post_init__(self):
        terminal = np.array(self.terminal, dtype=float)
        if terminal.shape != (self.space.n_x,):
            raise ValueError(
                f'terminal must have {self.space.n_x} samples, '
                f'got {terminal.shape}'
            )
        if not np.all(np.isfinite(terminal)):
            raise ValueError('terminal condition must be finite')
        if self.stencil not in STENCILS:
            raise ValueError(f'unknown stencil {self.stencil!r}')
        if not 0 < self.cfl <= 1:
            raise ValueError(f'cfl must lie in (0, 1], got {self.cfl}')
        terminal.setflags(write=False)
        object.__setattr__(self, 'terminal', terminal)

    @property
    def time(self):
        return self.source.time

    @property
    def space(self):
        return self.source.space


@dataclass(frozen=True)
class BernsteinCertificate:
    bound: float
    observed: float

    @property
    def passed(self):
        return self.observed <= self.bound


@dataclass(frozen=True, eq=False)
class HjbSolution:
    u: ValueField
    v: ValueField
    control: ControlField
    substeps: tuple = ()
    residual: float = math.nan
    gaps: tuple = field(default=())
    certificate: BernsteinCertificate = None

    @property
    def contraction_factor(self):
        """Эмпирический множитель сжатия: экспонента наклона log(gap)."""
        gaps = np.array([gap for gap in self.gaps if gap > 0])
        if gaps.size < 2:
            return None
        slope = np.polyfit(np.arange(gaps.size), np.log(gaps), 1)[0]
        return float(np.exp(slope))


def cumulative_source(source):
    """C[j] = dt·Σ_{k≥j} ψ[k], C[n_t] = 0: дискретный ∫_t^T ψ ds."""
    dt = source.time.dt
    cumulative = np.zeros_like(source.values)
    cumulative[:-1] = dt * np.cumsum(source.values[:-1][::-1], axis=0)[::-1]
    return cumulative


def _hamiltonian_substeps(problem, x, z, dt):
    space = problem.space
    value, alpha, speed = numerical_hamiltonian(
        problem.hamiltonian, x, z, space, problem.stencil
    )
    count = substep_count(dt, space.dx, float(speed.max()), problem.cfl)
    step = dt / count
    spent = np.zeros_like(z)
    for index in range(count):
        if index:
            value, _, _ = numerical_hamiltonian(
                problem.hamiltonian, x, z, space, problem.stencil
            )
        spent += step * value
        z = z - step * value
    return spent, alpha, count


def solve_backward(problem):
    """Полунеявная схема: диффузия неявно, гамильтониан явно с подшагами.

    На шаге j: a = D⁻¹v^{j+1}, b = D⁻¹C^{j+1}, z = a + b - это u после
    диффузии; явная часть вычитает dt·H_h(z) (по подшагам при нарушении
    условия Куранта), и v^j = a + (b - C^{j+1}) - Σ dt_s·H_h.
    """
    time, space = problem.time, problem.space
    dt, x = time.dt, space.nodes
    diffuse = implicit_heat_solver(space, dt)
    cumulative = cumulative_source(problem.source)
    v = np.empty((time.n_t + 1, space.n_x))
    alpha = np.empty_like(v)
    substeps = []
    v[-1] = problem.terminal
    for j in range(time.n_t - 1, -1, -1):
        carried = diffuse(v[j + 1])
        shifted = diffuse(cumulative[j + 1])
        spent, alpha[j], count = _hamiltonian_substeps(
            problem, x, carried + shifted, dt
        )
        v[j] = carried + (shifted - cumulative[j + 1]) - spent
        if not np.all(np.isfinite(v[j])):
            raise NumericalFailure('non-finite value in HJB march', step=j)
        substeps.append(count)
    _, alpha[-1], _ = numerical_hamiltonian(
        problem.hamiltonian, x, problem.terminal, space, problem.stencil
    )
    substeps = tuple(reversed(substeps))
    if max(substeps) > 1:
        logger.warning(
            'HJB explicit part sub-stepped on %d of %d steps (max %d)',
            sum(count > 1 for count in substeps), time.n_t, max(substeps),
        )
    solution = HjbSolution(
        u=ValueField(time, space, v + cumulative),
        v=ValueField(time, space, v),
        control=ControlField(time, space, alpha),
        substeps=substeps,
    )
    return replace(solution, residual=hjb_residual(solution, problem))


def linear_step(alpha, u, space, dt, stencil='upwind'):
    """Шаг линеаризованного HJB с замороженным α: (I - dt·Aᵀ)·D⁻¹u.

    Перенос -Aᵀw - точное транспонирование потока Фоккера-Планка.
    """
    w = implicit_heat_solver(space, dt)(u)
    if stencil == 'centered':
        return w + dt * alpha * d_dx(w, space)
    forward = (np.roll(w, -1) - w) / space.dx
    backward = np.roll(forward, 1)
    transport = (
        np.maximum(alpha, 0.0) * forward + np.minimum(alpha, 0.0) * backward
    )
    return w + dt * transport


def hjb_residual(solution, problem):
    """Максимум невязки -∂_t u + H(x, Du) - Δu - ψ на полушагах.

    Узлы по обе стороны от скачка источника по времени пропускаются.
    """
    u = solution.u.values
    psi = problem.source.values
    time, space = problem.time, problem.space
    x = space.nodes
    jumps = np.abs(np.diff(psi, axis=0)).max(axis=1)
    typical = float(np.median(jumps))
    worst = 0.0
    for j in range(1, time.n_t - 1):
        if max(jumps[j - 1], jumps[j]) > 10 * typical + 1e-12:
            continue
        middle = 0.5 * (u[j] + u[j + 1])
        residual = (
            -(u[j + 1] - u[j]) / time.dt
            + problem.hamiltonian.value(x, d_dx(middle, space))
            - laplacian(middle, space)
            - psi[j]
        )
        worst = max(worst, float(np.abs(residual).max()))
    return worst


@dataclass(frozen=True)
class BernsteinInputs:
    """Входы априорной оценки градиента.

    multiplier_gradient = ‖Dφ‖∞, multiplier_mass = ∫λ/ε dt,
    terminal_multiplier = β/δ, где φ = δΨ/δm.
    """
    growth_constant: float
    horizon: float
    multiplier_gradient: float = 0.0
    multiplier_mass: float = 0.0
    source_gradient: float = 0.0
    terminal_multiplier: float = 0.0
    terminal_multiplier_gradient: float = 0.0
    terminal_gradient: float = 0.0

    def bound(self):
        c0, horizon = self.growth_constant, self.horizon
        interior = 2 * math.exp(c0 * horizon) * (
            c0 * horizon
            + self.multiplier_gradient * self.multiplier_mass
            + self.source_gradient
        )
        boundary = 2 * math.sqrt(2) * (
            self.terminal_multiplier * self.terminal_multiplier_gradient
            + self.terminal_gradient
        )
        return interior + boundary

    @classmethod
    def from_problem(cls, problem):
        """Оценка только по данным задачи: весь источник в ‖Dψ‖∞."""
        space = problem.space
        return cls(
            growth_constant=problem.hamiltonian.growth_constant,
            horizon=problem.time.horizon,
            source_gradient=_sup_gradient(problem.source.values, space),
            terminal_gradient=_sup_gradient(problem.terminal, space),
        )


def _sup_gradient(values, space):
    return float(np.abs(d_dx(values, space)).max())


def bernstein_bound(solution, inputs):
    observed = float(np.abs(d_dx(solution.u.values, solution.u.space)).max())
    certificate = BernsteinCertificate(bound=inputs.bound(), observed=observed)
    if not certificate.passed:
        logger.warning(
            'observed max|Du| = %.6g exceeds the a-priori bound %.6g',
            observed, certificate.bound,
        )
    return certificate


def cutoff(p, radius):
    """χ_R(p): 1 при |p| ≤ R + 1, 0 при |p| ≥ R + 2, C² между ними."""
    s = np.clip(np.abs(p) - radius - 1.0, 0.0, 1.0)
    return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def _duhamel_sweep(problem, previous, radius):
    time, space = problem.time, problem.space
    spec, x, dt = problem.hamiltonian, space.nodes, time.dt
    psi = problem.source.values
    u = np.empty_like(previous)
    u[-1] = problem.terminal
    for j in range(time.n_t - 1, -1, -1):
        p = spectral_derivative(previous[j + 1], space)
        forcing = psi[j] - cutoff(p, radius) * spec.value(x, p)
        u[j] = heat_semigroup(u[j + 1] + dt * forcing, space, dt)
    return u


def _growing(gaps):
    """Три роста подряд и последний разрыв больше первого."""
    if len(gaps) < 4:
        return False
    return gaps[-1] > gaps[-2] > gaps[-3] > gaps[-4] and gaps[-1] > gaps[0]


def heat_semigroup_picard(problem, radius=None, tol=1e-10, max_iter=None,
                          weight=1.0):
    """Неподвижная точка u = P_{T-s}g̃ + ∫_s^T P_{t-s}[ψ - H_R(x, Du)] dt.

    Разрыв итераций меряется в норме max_j e^{-weight·(T - t_j)}‖·‖∞.
    Три роста разрыва подряд выше начального - NonContractionError.
    """
    time, space = problem.time, problem.space
    if radius is None:
        radius = 2 * BernsteinInputs.from_problem(problem).bound()
    if max_iter is None:
        max_iter = time.n_t + 5
    weights = np.exp(-weight * (time.horizon - time.nodes))
    current = np.array([
        heat_semigroup(problem.terminal, space, time.horizon - t)
        for t in time.nodes
    ])
    gaps = []
    for iteration in range(max_iter):
        following = _duhamel_sweep(problem, current, radius)
        if not np.all(np.isfinite(following)):
            raise NonContractionError('non-finite Picard iterate', gaps)
        gap = float((weights * np.abs(following - current).max(axis=1)).max())
        gaps.append(gap)
        current = following
        logger.debug('Picard iteration %d: gap %.3e', iteration, gap)
        if gap <= tol:
            break
        if _growing(gaps):
            raise NonContractionError('Picard gaps are growing', gaps)
    else:
        raise NonContractionError(
            f'Picard iteration did not reach tol={tol:g} '
            f'in {max_iter} sweeps',
            gaps,
        )
    spec, x = problem.hamiltonian, space.nodes
    alpha = -spec.grad_p(x, spectral_derivative(current, space))
    solution = HjbSolution(
        u=ValueField(time, space, current),
        v=ValueField(time, space, current - cumulative_source(problem.source)),
        control=ControlField(time, space, alpha),
        substeps=(1,) * time.n_t,
        gaps=tuple(gaps),
    )
    return replace(solution, residual=hjb_residual(solution, problem))
