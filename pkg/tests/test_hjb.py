import numpy as np
import pytest

from experiments.checks import (
    COLE_HOPF_TOLERANCE,
    cole_hopf_check,
    comparison_checks,
)
from solver.grid import SpaceGrid, TimeGrid, ValueField
from solver.hamiltonian import QuadraticHamiltonian
from solver.hjb import (
    BernsteinInputs,
    HjbProblem,
    HjbSolution,
    bernstein_bound,
    cumulative_source,
    cutoff,
    heat_semigroup_picard,
    solve_backward,
)
from solver.oracles import cole_hopf


@pytest.fixture
def oracle_problem():
    time, space = TimeGrid(0.1, 50), SpaceGrid(32)
    return HjbProblem(
        hamiltonian=QuadraticHamiltonian(),
        source=ValueField.zeros(time, space),
        terminal=0.5 * np.cos(2 * np.pi * space.nodes),
        stencil='centered',
    )


class TestBackwardSolver:

    def test_cole_hopf(self):
        result = cole_hopf_check()
        assert result.passed, (
            f'Решатель HJB расходится с решением Коула-Хопфа: {result.value:.3e}'
        )
        assert result.limit == COLE_HOPF_TOLERANCE

    def test_zero_data(self, quadratic, time, space):
        problem = HjbProblem(
            quadratic, ValueField.zeros(time, space), np.zeros(space.n_x)
        )
        solution = solve_backward(problem)
        assert np.abs(solution.u.values).max() == 0.0, (
            'Проверьте, что нулевые данные дают нулевое решение'
        )
        assert np.abs(solution.control.values).max() == 0.0

    def test_cumulative_source(self, time, space):
        source = ValueField.from_function(
            time, space, lambda t, x: np.ones_like(x)
        )
        cumulative = cumulative_source(source)
        expected = (time.horizon - time.nodes)[:, None] * np.ones(space.n_x)
        assert np.allclose(cumulative, expected, atol=1e-12)
        assert np.all(cumulative[-1] == 0.0)

    def test_space_constant_source(self, quadratic, time, space):
        level = 1.5
        source = ValueField.from_function(
            time, space, lambda t, x: level * np.ones_like(x)
        )
        problem = HjbProblem(quadratic, source, np.zeros(space.n_x))
        solution = solve_backward(problem)
        expected = level * (time.horizon - time.nodes)[:, None]
        assert np.allclose(solution.u.values, expected, atol=1e-10), (
            'Проверьте, что постоянный по x источник дает u = c(T - t)'
        )
        assert np.allclose(
            solution.u.values - solution.v.values, cumulative_source(source)
        )

    def test_source_with_time_jump(self, quadratic, time, space):
        level = 2.0
        jump = time.horizon / 2 + time.dt / 2
        source = ValueField.from_function(
            time, space, lambda t, x: level * (t > jump) * np.ones_like(x)
        )
        problem = HjbProblem(quadratic, source, np.zeros(space.n_x))
        solution = solve_backward(problem)
        first = int(np.argmax(time.nodes > jump))
        steps = np.arange(time.n_t + 1)
        expected = level * time.dt * (time.n_t - np.maximum(steps, first))
        assert np.allclose(
            solution.u.values, expected[:, None], atol=1e-10
        ), 'Разрыв источника по времени должен интегрироваться без сглаживания'
        jumps = np.abs(np.diff(solution.u.values, axis=0)).max()
        assert jumps <= level * time.dt + 1e-12, (
            'u должна оставаться непрерывной по времени'
        )
        assert max(solution.substeps) == 1

    def test_comparison_and_shift(self, inactive_experiment):
        results = comparison_checks(inactive_experiment.problem)
        assert [result.name for result in results] == [
            'hjb_comparison', 'hjb_constant_shift'
        ]
        for result in results:
            assert result.passed, f'Проверка {result.name} не прошла: {result.value}'

    def test_bernstein_certificate(self, oracle_problem):
        solution = solve_backward(oracle_problem)
        certificate = bernstein_bound(
            solution, BernsteinInputs.from_problem(oracle_problem)
        )
        assert certificate.passed, (
            'Наблюдаемый max|Du| превышает априорную оценку'
        )
        assert certificate.observed > 0

    @pytest.mark.parametrize('field, value', [
        ('stencil', 'weno'),
        ('cfl', 0.0),
        ('cfl', 1.5),
    ])
    def test_invalid_problem(self, quadratic, time, space, field, value):
        arguments = {
            'hamiltonian': quadratic,
            'source': ValueField.zeros(time, space),
            'terminal': np.zeros(space.n_x),
            field: value,
        }
        with pytest.raises(ValueError):
            HjbProblem(**arguments)

    def test_terminal_shape(self, quadratic, time, space):
        with pytest.raises(ValueError):
            HjbProblem(quadratic, ValueField.zeros(time, space), np.zeros(5))


def cole_hopf_error(n_x, n_t, horizon=0.1):
    time, space = TimeGrid(horizon, n_t), SpaceGrid(n_x)
    terminal = 0.5 * np.cos(2 * np.pi * space.nodes)
    problem = HjbProblem(
        hamiltonian=QuadraticHamiltonian(),
        source=ValueField.zeros(time, space),
        terminal=terminal,
        stencil='centered',
    )
    solution = solve_backward(problem)
    exact = cole_hopf(terminal, time, space)
    return np.abs(solution.u.values - exact.values).max()


def observed_orders(errors):
    errors = np.asarray(errors)
    return np.log2(errors[:-1] / errors[1:])


class TestRefinement:

    def test_space_order(self):
        errors = [cole_hopf_error(n_x, 4000) for n_x in (8, 16, 32)]
        orders = observed_orders(errors)
        assert np.all(orders >= 1.5), (
            f'Центральная схема должна сходиться со вторым порядком по dx: '
            f'{orders}'
        )

    def test_time_order(self):
        errors = [cole_hopf_error(64, n_t) for n_t in (25, 50, 100)]
        orders = observed_orders(errors)
        assert np.all(orders >= 0.8), (
            f'Схема должна сходиться с первым порядком по dt: {orders}'
        )
        assert errors[-1] < COLE_HOPF_TOLERANCE


class TestPicard:

    def test_agrees_with_exact_solution(self, oracle_problem):
        solution = heat_semigroup_picard(oracle_problem)
        exact = cole_hopf(
            oracle_problem.terminal, oracle_problem.time, oracle_problem.space
        )
        error = np.abs(solution.u.values - exact.values).max()
        assert error < 0.02, f'Итерации Пикара далеко от точного решения: {error:.3e}'
        assert solution.gaps[-1] <= 1e-10

    def test_agrees_with_backward(self, oracle_problem):
        picard = heat_semigroup_picard(oracle_problem)
        backward = solve_backward(oracle_problem)
        difference = np.abs(picard.u.values - backward.u.values).max()
        assert difference < 0.05

    def test_contraction_factor(self):
        solution = HjbSolution(u=None, v=None, control=None, gaps=(1.0, 0.5, 0.25))
        assert solution.contraction_factor == pytest.approx(0.5)
        assert HjbSolution(u=None, v=None, control=None).contraction_factor is None


class TestCutoff:

    def test_values(self):
        radius = 3.0
        p = np.array([0.0, -4.0, 4.0, 5.0, -5.0, 7.0])
        assert np.allclose(cutoff(p, radius), [1, 1, 1, 0, 0, 0])

    def test_monotone_between(self):
        p = np.linspace(4.0, 5.0, 101)
        values = cutoff(p, 3.0)
        assert np.all(np.diff(values) <= 0)
        assert np.all((values >= 0) & (values <= 1))
