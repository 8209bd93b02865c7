"""Внешний цикл штрафной задачи (P_{ε,δ}) и развертка по (ε, δ).

Фиктивная игра: множители по усредненному пути m̄, обратный HJB,
прямой FP с лучшим ответом α, усреднение m̄ с весом 2/(k + 2).
"""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import diagnostics
from .exceptions import CrossingError, SolverError
from .fokker_planck import solve_forward
from .functionals import (
    SmoothPlus,
    gradient_sup,
    linear_derivative,
    psi_plus,
    q_distance_path,
)
from .grid import MeasurePath, ValueField, implicit_heat_solver
from .hjb import BernsteinInputs, HjbProblem, bernstein_bound, solve_backward

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ControlProblem:
    """Данные задачи управления, общие для всех (ε, δ)."""
    time: object
    space: object
    hamiltonian: object
    constraint: object
    initial: object
    running: object = None
    terminal: object = None
    smoothing: SmoothPlus = SmoothPlus()
    stencil: str = 'upwind'
    tol_fp: float = 1e-8
    tol_lambda: float = 1e-3
    max_rounds: int = 200
    q_modes: int = 16

    def __post_init__(self):
        if self.initial.grid != self.space:
            raise ValueError('initial measure lives on a different grid')
        if self.max_rounds < 1:
            raise ValueError(
                f'max_rounds must be positive, got {self.max_rounds}'
            )


@dataclass(frozen=True, eq=False)
class MultiplierState:
    """(ε, δ, λ, β); ν = λ/ε и η = β/δ."""
    epsilon: float
    delta: float
    lam: np.ndarray
    beta: float

    def __post_init__(self):
        if not (self.epsilon > 0 and self.delta > 0):
            raise ValueError('epsilon and delta must be positive')
        lam = np.array(self.lam, dtype=float)
        if lam.min() < 0 or lam.max() > 1 or not 0 <= self.beta <= 1:
            raise ValueError('multipliers must lie in [0, 1]')
        lam.setflags(write=False)
        object.__setattr__(self, 'lam', lam)

    @property
    def nu(self):
        return self.lam / self.epsilon

    @property
    def eta(self):
        return self.beta / self.delta

    @classmethod
    def inactive(cls, time, epsilon=1.0, delta=1.0):
        return cls(epsilon, delta, np.zeros(time.n_t + 1), 0.0)

    def change(self, other):
        running = float(np.abs(self.lam - other.lam).max())
        return max(running, abs(self.beta - other.beta))


def assemble_source(problem, path, multipliers, j):
    """ν(t_j)·δΨ/δm(m(t_j)) + δf/δm(t_j, m(t_j))."""
    t, m = problem.time.nodes[j], path[j]
    psi = problem.constraint.psi
    source = multipliers.nu[j] * linear_derivative(psi, m, t)
    if problem.running is not None:
        source = source + linear_derivative(problem.running, m, t)
    return source


def assemble_terminal(problem, final, multipliers):
    psi = problem.constraint.psi
    terminal = multipliers.eta * linear_derivative(psi, final)
    if problem.terminal is not None:
        terminal = terminal + linear_derivative(problem.terminal, final)
    return terminal


def update_multiplier(problem, path, epsilon, delta):
    """λ(t_j) = γ_h'(Ψ(m(t_j))), β = γ_h'(Ψ(m(T)))."""
    series = diagnostics.psi_trajectory(problem.constraint.psi, path)
    prime = problem.smoothing.prime(series)
    return MultiplierState(epsilon, delta, prime, float(prime[-1]))


@dataclass(frozen=True)
class CostReport:
    kinetic: float
    running: float
    terminal: float
    running_penalty: float
    terminal_penalty: float

    @property
    def total(self):
        """J = ∫∫L dm dt + ∫f dt + g(m_T)."""
        return self.kinetic + self.running + self.terminal

    @property
    def penalized(self):
        return self.total + self.running_penalty + self.terminal_penalty


def total_cost(problem, alpha, path, epsilon, delta):
    """Кинетическая часть - левые прямоугольники dt·Σ_{j<N}, она
    согласована с шагом схемы; f и Ψ⁺ интегрируются трапециями.
    """
    time, space = problem.time, problem.space
    x = space.nodes
    lagrangian = problem.hamiltonian.lagrangian
    kinetic = sum(
        time.dt * space.dx * float(np.dot(
            lagrangian(x, alpha.values[j]), path.densities[j]
        ))
        for j in range(time.n_t)
    )
    running = 0.0
    if problem.running is not None:
        running = time.integral([
            problem.running(path[j], t) for j, t in enumerate(time.nodes)
        ])
    terminal = 0.0
    if problem.terminal is not None:
        terminal = problem.terminal(path.final)
    series = diagnostics.psi_trajectory(problem.constraint.psi, path)
    return CostReport(
        kinetic=kinetic,
        running=running,
        terminal=terminal,
        running_penalty=time.integral(psi_plus(series)) / epsilon,
        terminal_penalty=float(psi_plus(series[-1])) / delta,
    )


def heat_path(problem):
    """Путь m₀ под чистой диффузией: начальное приближение m̄₀."""
    diffuse = implicit_heat_solver(problem.space, problem.time.dt)
    densities = [problem.initial.density]
    for _ in range(problem.time.n_t):
        densities.append(diffuse(densities[-1]))
    return MeasurePath(problem.time, problem.space, np.array(densities))


@dataclass(frozen=True)
class RoundRecord:
    round: int
    gap: float
    response_gap: float
    multiplier_change: float
    exclusion: float
    penalized_cost: float
    max_psi: float


@dataclass(frozen=True, eq=False)
class PenalizedSolution:
    u: ValueField
    path: MeasurePath
    averaged: MeasurePath
    control: object
    multipliers: MultiplierState
    cost: CostReport
    hjb: object
    converged: bool
    history: tuple = field(default=())
    certificate: object = None

    @property
    def rounds(self):
        return len(self.history)

    @property
    def response_gap(self):
        """max_t q(m̃(t), m̄(t)) последнего раунда."""
        if not self.history:
            return math.nan
        return self.history[-1].response_gap


def hjb_problem(problem, averaged, multipliers):
    """Обратная задача раунда: источник и терминал по m̄ и множителям."""
    source = np.array([
        assemble_source(problem, averaged, multipliers, j)
        for j in range(problem.time.n_t + 1)
    ])
    return HjbProblem(
        hamiltonian=problem.hamiltonian,
        source=ValueField(problem.time, problem.space, source),
        terminal=assemble_terminal(problem, averaged.final, multipliers),
        stencil=problem.stencil,
    )


def _certificate(problem, hjb_solution, averaged, multipliers):
    psi, time = problem.constraint.psi, problem.time
    nodes = time.nodes
    running_gradient = 0.0
    if problem.running is not None:
        running_gradient = max(
            gradient_sup(problem.running, averaged[j], t)
            for j, t in enumerate(nodes)
        )
    terminal_gradient = 0.0
    if problem.terminal is not None:
        terminal_gradient = gradient_sup(problem.terminal, averaged.final)
    inputs = BernsteinInputs(
        growth_constant=problem.hamiltonian.growth_constant,
        horizon=time.horizon,
        multiplier_gradient=max(
            gradient_sup(psi, averaged[j], t) for j, t in enumerate(nodes)
        ),
        multiplier_mass=time.integral(multipliers.nu),
        source_gradient=running_gradient,
        terminal_multiplier=multipliers.eta,
        terminal_multiplier_gradient=gradient_sup(
            psi, averaged.final, time.horizon
        ),
        terminal_gradient=terminal_gradient,
    )
    return bernstein_bound(hjb_solution, inputs)


def exclusion_limit(problem, series):
    return problem.tol_lambda * max(1.0, float(np.abs(series).max()))


def solve_penalized(problem, epsilon, delta, constrained=True):
    """Фиктивная игра для (P_{ε,δ}).

    Сходимость: max_t q(m̄_{k+1}, m̄_k) < tol_fp, max_t q(m̃_k, m̄_k) <
    tol_fp, max|Δλ|, |Δβ| < tol_λ, и λ, β согласованы с Ψ(m̃) вне полосы
    ширины h. Возвращается тройка последнего раунда: u по m̄_k, α и
    m̃_k = FP(α). Исчерпание раундов дает converged=False, а не
    исключение.
    """
    time = problem.time
    psi = problem.constraint.psi
    width = problem.smoothing.width
    averaged = heat_path(problem)
    history = []
    converged = False
    previous = None
    for k in range(problem.max_rounds):
        current = averaged
        if constrained:
            multipliers = update_multiplier(problem, current, epsilon, delta)
        else:
            multipliers = MultiplierState.inactive(time, epsilon, delta)
        backward = hjb_problem(problem, current, multipliers)
        try:
            hjb_solution = solve_backward(backward)
            response = solve_forward(
                hjb_solution.control, problem.initial, problem.stencil
            )
        except SolverError as error:
            error.round = k
            logger.error('round %d failed: %s', k, error)
            raise
        weight = 2.0 / (k + 2)
        averaged = current.mix(response, weight)
        gap = float(q_distance_path(averaged, current, problem.q_modes).max())
        response_gap = float(
            q_distance_path(response, current, problem.q_modes).max()
        )
        change = 0.0 if previous is None else multipliers.change(previous)
        series = diagnostics.psi_trajectory(psi, response)
        exclusion = 0.0
        if constrained:
            exclusion = diagnostics.exclusion_residual(
                multipliers, series, width
            )
        cost = total_cost(
            problem, hjb_solution.control, response, epsilon, delta
        )
        history.append(RoundRecord(
            round=k,
            gap=gap,
            response_gap=response_gap,
            multiplier_change=change,
            exclusion=exclusion,
            penalized_cost=cost.penalized,
            max_psi=float(series.max()),
        ))
        logger.debug(
            'round %d: gap %.3e, response gap %.3e, multiplier change %.3e, '
            'exclusion %.3e, J_pen %.6g',
            k, gap, response_gap, change, exclusion, cost.penalized,
        )
        if (
            gap < problem.tol_fp
            and response_gap < problem.tol_fp
            and change < problem.tol_lambda
            and exclusion <= exclusion_limit(problem, series)
        ):
            converged = True
            break
        previous = multipliers
    if converged:
        logger.info(
            'penalized solve (eps=%g, delta=%g) converged in %d rounds',
            epsilon, delta, len(history),
        )
    else:
        logger.warning(
            'penalized solve (eps=%g, delta=%g) did not converge in %d '
            'rounds: response gap %.3e, exclusion %.3e',
            epsilon, delta, problem.max_rounds, response_gap, exclusion,
        )
    return PenalizedSolution(
        u=hjb_solution.u,
        path=response,
        averaged=current,
        control=hjb_solution.control,
        multipliers=multipliers,
        cost=cost,
        hjb=hjb_solution,
        converged=converged,
        history=tuple(history),
        certificate=_certificate(
            problem, hjb_solution, current, multipliers),
    )


def solve_unconstrained(problem):
    """Тот же цикл с выключенным ограничением: λ ≡ 0, β = 0."""
    return solve_penalized(problem, 1.0, 1.0, constrained=False)


@dataclass(frozen=True)
class SweepPoint:
    epsilon: float
    delta: float
    converged: bool = False
    rounds: int = 0
    max_psi: float = math.nan
    terminal_psi: float = math.nan
    cost: float = math.nan
    penalized_cost: float = math.nan
    multiplier_l1: float = math.nan
    lip_t: float = math.nan
    lip_x: float = math.nan
    complementarity: float = math.nan
    exclusion: float = math.nan
    value_gap: float = math.nan
    leading_max: float = math.nan
    remainder_max: float = math.nan
    certificate_passed: bool = False
    error: str = None

    @property
    def feasible(self):
        return self.error is None and self.converged

    def within(self, ctol):
        return self.feasible and self.max_psi <= ctol


def mechanism(problem, solution):
    """Максимумы главного члена и |остатка| ψ̈ на активных дугах.

    Активная дуга - узлы с насыщенным λ = 1, там ν = 1/ε.
    """
    leading, remainder = [], []
    lam = solution.multipliers.lam
    for j in range(1, problem.time.n_t):
        if lam[j] < 1.0:
            continue
        try:
            value, rest = diagnostics.psi_ddot_leading(
                problem.hamiltonian, problem.constraint.psi, solution.u,
                solution.path, solution.multipliers, j,
            )
        except CrossingError:
            continue
        leading.append(value)
        remainder.append(abs(rest))
    if not leading:
        return math.nan, math.nan
    return max(leading), max(remainder)


def sweep_point(problem, epsilon, delta):
    """Одна точка развертки; ошибка решателя записывается, а не бросается."""
    try:
        solution = solve_penalized(problem, epsilon, delta)
    except SolverError as error:
        logger.warning(
            'sweep point eps=%g delta=%g failed: %s', epsilon, delta, error
        )
        return SweepPoint(epsilon=epsilon, delta=delta, error=str(error))
    series = diagnostics.psi_trajectory(problem.constraint.psi, solution.path)
    lip_t, lip_x = diagnostics.control_lipschitz(solution.control)
    leading, remainder = mechanism(problem, solution)
    return SweepPoint(
        epsilon=epsilon,
        delta=delta,
        converged=solution.converged,
        rounds=solution.rounds,
        max_psi=float(series.max()),
        terminal_psi=float(series[-1]),
        cost=solution.cost.total,
        penalized_cost=solution.cost.penalized,
        multiplier_l1=diagnostics.multiplier_l1(
            solution.multipliers, problem.time
        ),
        lip_t=lip_t,
        lip_x=lip_x,
        complementarity=diagnostics.complementarity_residual(
            solution.multipliers, series, problem.time,
            problem.smoothing.width,
        ),
        exclusion=solution.history[-1].exclusion,
        value_gap=diagnostics.value_report(
            solution.u, solution.path, solution.cost
        ).gap,
        leading_max=leading,
        remainder_max=remainder,
        certificate_passed=solution.certificate.passed,
    )


@dataclass(frozen=True)
class SweepReport:
    points: tuple
    ctol: float
    threshold: tuple = None
    cost_spread: float = math.nan
    multiplier_spread: float = math.nan
    multiplier_slope: float = math.nan
    leading_slope: float = math.nan
    lipschitz_ratio: float = math.nan


def _loglog_slope(epsilons, values):
    epsilons, values = np.asarray(epsilons, float), np.asarray(values, float)
    usable = np.isfinite(values) & (values > 0)
    if usable.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(
        np.log(epsilons[usable]), np.log(values[usable]), 1
    )
    return float(slope)


def summarize(points, ctol):
    """Порог допустимости и статистики по допустимой области.

    Наклон главного члена ψ̈ берется по всем сошедшимся точкам: в
    допустимой области насыщенных узлов может не быть.
    """
    threshold = None
    for index, point in enumerate(points):
        if all(later.within(ctol) for later in points[index:]):
            threshold = (point.epsilon, point.delta)
            break
    feasible = [point for point in points if point.within(ctol)]
    if not feasible:
        return SweepReport(
            points=tuple(points), ctol=ctol, threshold=threshold
        )
    costs = np.array([point.cost for point in feasible])
    masses = np.array([point.multiplier_l1 for point in feasible])
    lips = np.array([point.lip_t for point in feasible])
    epsilons = [point.epsilon for point in feasible]
    solved = [point for point in points if point.feasible]
    positive = masses[masses > 0]
    spread = math.nan
    if positive.size:
        spread = float(positive.max() / positive.min())
    ratio = math.nan
    if np.median(lips) > 0:
        ratio = float(lips.max() / np.median(lips))
    return SweepReport(
        points=tuple(points),
        ctol=ctol,
        threshold=threshold,
        cost_spread=float(np.ptp(costs) / (1.0 + np.abs(costs).max())),
        multiplier_spread=spread,
        multiplier_slope=_loglog_slope(epsilons, masses),
        leading_slope=_loglog_slope(
            [point.epsilon for point in solved],
            [point.leading_max for point in solved],
        ),
        lipschitz_ratio=ratio,
    )


def sweep_pairs(epsilons, deltas, pairing='zip'):
    """Пары (ε, δ): поэлементно или декартово произведение."""
    for name, values in (('epsilons', epsilons), ('deltas', deltas)):
        if list(values) != sorted(values, reverse=True):
            raise ValueError(f'{name} must be sorted in decreasing order')
    if pairing == 'zip':
        if len(epsilons) != len(deltas):
            raise ValueError(
                'zip pairing needs equally long epsilon and delta lists'
            )
        return list(zip(epsilons, deltas))
    if pairing == 'grid':
        return list(itertools.product(epsilons, deltas))
    raise ValueError(f'unknown pairing {pairing!r}')


def epsilon_sweep(problem, epsilons, deltas, ctol=1e-2, pairing='zip', jobs=1):
    """Решает (P_{ε,δ}) на каждой паре; порядок точек не зависит от jobs."""
    pairs = sweep_pairs(epsilons, deltas, pairing)
    run = partial(sweep_point, problem)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            points = list(executor.map(run, *zip(*pairs)))
    else:
        points = [run(epsilon, delta) for epsilon, delta in pairs]
    report = summarize(points, ctol)
    logger.info(
        'sweep of %d points: threshold %s', len(points), report.threshold
    )
    return report
