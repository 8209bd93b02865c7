import numpy as np
import pytest

from experiments.checks import heat_mode_check
from solver.exceptions import NumericalFailure
from solver.fokker_planck import (
    adjointness_check,
    flux_divergence,
    solve_forward,
    weak_form_residual,
)
from solver.grid import (
    ControlField,
    GridMeasure,
    SpaceGrid,
    TimeGrid,
    ValueField,
)
from solver.oracles import drifted_heat
from solver.particles import path_wasserstein


@pytest.fixture
def sine_drift(time, space):
    return ControlField.from_function(
        time, space, lambda t, x: 2.0 * np.sin(2 * np.pi * x)
    )


class TestForwardSolver:

    def test_heat_mode(self):
        result = heat_mode_check()
        assert result.passed, (
            f'Затухание гармоники расходится с e^(-ω²t): {result.value:.3e}'
        )

    @pytest.mark.parametrize('stencil', ['upwind', 'centered'])
    def test_mass_and_positivity(self, sine_drift, bump, stencil):
        path = solve_forward(sine_drift, bump, stencil)
        masses = path.space.dx * path.densities.sum(axis=1)
        assert np.abs(masses - 1.0).max() < 1e-10, 'Проверьте сохранение массы'
        assert path.densities.min() >= -1e-12, 'Плотность стала отрицательной'

    def test_zero_drift_keeps_uniform(self, time, space, uniform):
        path = solve_forward(ControlField.zeros(time, space), uniform)
        assert np.allclose(path.densities, 1.0, atol=1e-12)

    def test_flux_is_conservative(self, space, bump):
        alpha = np.cos(2 * np.pi * space.nodes)
        for stencil in ('upwind', 'centered'):
            divergence = flux_divergence(alpha, bump.density, space, stencil)
            assert abs(divergence.sum()) < 1e-10

    def test_grid_mismatch(self, sine_drift):
        other = GridMeasure.uniform(SpaceGrid(16))
        with pytest.raises(ValueError):
            solve_forward(sine_drift, other)

    def test_unknown_stencil(self, space, bump):
        with pytest.raises(ValueError):
            flux_divergence(np.zeros(space.n_x), bump.density, space, 'weno')

    def test_centered_failure_is_reported(self, time, space, bump):
        alpha = ControlField.from_function(
            time, space, lambda t, x: 400.0 * np.sin(2 * np.pi * x)
        )
        with pytest.raises(NumericalFailure) as info:
            solve_forward(alpha, bump, 'centered')
        assert info.value.step is not None

    def test_constant_drift_matches_spectral_solution(self, time, space, bump):
        speed = 1.0
        alpha = ControlField.zeros(time, space)
        alpha = ControlField(time, space, alpha.values + speed)
        grid_path = solve_forward(alpha, bump)
        spectral = drifted_heat(bump, time, speed)
        distance = path_wasserstein(grid_path, spectral).max()
        assert distance < 0.02, (
            f'Сеточный путь далеко от спектрального решения: W1 = {distance:.3e}'
        )

    def test_weak_form(self, sine_drift, bump, time, space):
        path = solve_forward(sine_drift, bump)
        test = ValueField.from_function(
            time, space, lambda t, x: np.cos(2 * np.pi * x)
        )
        residual = weak_form_residual(path, sine_drift, test, 0.0, time.horizon)
        assert residual < 0.1
        with pytest.raises(ValueError):
            weak_form_residual(path, sine_drift, test, 0.1, 0.0)


def drifted_heat_error(n_x, n_t=4000, horizon=0.1, speed=1.0):
    time, space = TimeGrid(horizon, n_t), SpaceGrid(n_x)
    initial = GridMeasure.from_weights(
        space, 1.0 + 0.6 * np.cos(2 * np.pi * space.nodes)
    )
    alpha = ControlField(
        time, space, np.full((time.n_t + 1, space.n_x), speed)
    )
    grid_path = solve_forward(alpha, initial)
    exact = drifted_heat(initial, time, speed)
    return np.abs(grid_path.densities - exact.densities).max()


class TestRefinement:

    def test_upwind_space_order(self):
        errors = [drifted_heat_error(n_x) for n_x in (32, 64, 128)]
        assert errors[0] > errors[1] > errors[2], (
            f'Ошибка должна убывать при измельчении сетки: {errors}'
        )
        order = np.log2(errors[1] / errors[2])
        assert order >= 0.7, (
            f'Противопоточная схема должна сходиться с первым порядком '
            f'по dx, получено {order:.2f}'
        )


class TestAdjointness:

    @pytest.mark.parametrize('stencil', ['upwind', 'centered'])
    def test_exact_transpose(self, space, stencil):
        alpha = 1.5 * np.sin(2 * np.pi * space.nodes) + 0.3
        defect = adjointness_check(alpha, space, 0.005, stencil)
        assert defect <= 1e-10, (
            f'Шаг FP не сопряжен шагу линеаризованного HJB: {defect:.3e}'
        )

    def test_mismatched_pair(self, space):
        alpha = 1.5 * np.sin(2 * np.pi * space.nodes) + 0.3
        defect = adjointness_check(
            alpha, space, 0.005, 'upwind', dual_stencil='centered'
        )
        assert defect > 1e-6, 'Несогласованная пара шаблонов должна давать дефект'
