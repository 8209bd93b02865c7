"""Сетки на торе, дискретные меры, поля и разностное исчисление.

Все массивы заданы в узлах x_i = i·dx; меры - плотности относительно dx.
Объекты неизменяемы: массивы копируются и помечаются read-only.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sparse
from scipy.integrate import trapezoid
from scipy.sparse.linalg import factorized

MASS_ATOL = 1e-10
NEGATIVITY_ATOL = 1e-12


def _frozen(values, shape, name):
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise ValueError(f'{name} must have shape {shape}, got {array.shape}')
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    n_t: int

    def __post_init__(self):
        if self.n_t < 2:
            raise ValueError(f'n_t must be at least 2, got {self.n_t}')
        if not self.horizon > 0:
            raise ValueError(f'horizon must be positive, got {self.horizon}')

    @property
    def dt(self):
        return self.horizon / self.n_t

    @property
    def nodes(self):
        return np.linspace(0.0, self.horizon, self.n_t + 1)

    def index(self, t):
        """Индекс ближайшего к t узла."""
        return int(min(max(round(t / self.dt), 0), self.n_t))

    def integral(self, series):
        """Интеграл по [0, T] от узловых значений (трапеции)."""
        return float(trapezoid(np.asarray(series, dtype=float), dx=self.dt))


@dataclass(frozen=True)
class SpaceGrid:
    n_x: int
    length: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        if self.n_x < 8:
            raise ValueError(f'n_x must be at least 8, got {self.n_x}')
        if not self.length > 0:
            raise ValueError(f'length must be positive, got {self.length}')
        if not self.periodic:
            raise ValueError('only periodic grids are supported')

    @property
    def dx(self):
        return self.length / self.n_x

    @property
    def nodes(self):
        return np.arange(self.n_x) * self.dx

    @property
    def wavenumbers(self):
        """Волновые числа 2πk/L в порядке numpy.fft.rfftfreq."""
        return 2 * np.pi * np.fft.rfftfreq(self.n_x, d=self.dx)

    def check(self, values, name='values'):
        values = np.asarray(values, dtype=float)
        if values.shape[-1:] != (self.n_x,):
            raise ValueError(
                f'{name} must have {self.n_x} samples, '
                f'got shape {values.shape}'
            )
        return values


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Вероятностная плотность на периодической сетке."""
    grid: SpaceGrid
    density: np.ndarray

    def __post_init__(self):
        density = _frozen(self.density, (self.grid.n_x,), 'density')
        if not np.all(np.isfinite(density)):
            raise ValueError('density must be finite')
        if density.min() < -NEGATIVITY_ATOL:
            raise ValueError(f'density is negative: min={density.min():.3e}')
        mass = self.grid.dx * density.sum()
        if abs(mass - 1.0) > MASS_ATOL:
            raise ValueError(f'density must have unit mass, got {mass!r}')
        object.__setattr__(self, 'density', density)

    @classmethod
    def from_weights(cls, grid, weights):
        """Нормирует неотрицательные веса в плотность."""
        weights = grid.check(weights, 'weights')
        if weights.min() < 0 or weights.sum() <= 0:
            raise ValueError('weights must be nonnegative with positive sum')
        return cls(grid, weights / (grid.dx * weights.sum()))

    @classmethod
    def uniform(cls, grid):
        return cls(grid, np.full(grid.n_x, 1.0 / grid.length))

    @property
    def mass(self):
        return float(self.grid.dx * self.density.sum())


@dataclass(frozen=True, eq=False)
class MeasurePath:
    """Траектория мер m(t_j), j = 0..n_t."""
    time: TimeGrid
    space: SpaceGrid
    densities: np.ndarray

    def __post_init__(self):
        shape = (self.time.n_t + 1, self.space.n_x)
        densities = _frozen(self.densities, shape, 'densities')
        if not np.all(np.isfinite(densities)):
            raise ValueError('densities must be finite')
        if densities.min() < -NEGATIVITY_ATOL:
            raise ValueError(f'density is negative: min={densities.min():.3e}')
        drift = np.abs(self.space.dx * densities.sum(axis=1) - 1.0).max()
        if drift > MASS_ATOL:
            raise ValueError(
                f'path slices must have unit mass, drift={drift:.3e}'
            )
        object.__setattr__(self, 'densities', densities)

    def __len__(self):
        return self.time.n_t + 1

    def __getitem__(self, j):
        return GridMeasure(self.space, self.densities[j])

    @property
    def initial(self):
        return self[0]

    @property
    def final(self):
        return self[self.time.n_t]

    @classmethod
    def constant(cls, time, measure):
        densities = np.tile(measure.density, (time.n_t + 1, 1))
        return cls(time, measure.grid, densities)

    def mix(self, other, weight):
        """(1 - weight)·self + weight·other."""
        return MeasurePath(
            self.time,
            self.space,
            (1.0 - weight) * self.densities + weight * other.densities,
        )


@dataclass(frozen=True, eq=False)
class ValueField:
    """Скалярное поле u(t_j, x_i) или источник ψ(t_j, x_i)."""
    time: TimeGrid
    space: SpaceGrid
    values: np.ndarray

    def __post_init__(self):
        shape = (self.time.n_t + 1, self.space.n_x)
        values = _frozen(self.values, shape, 'values')
        if not np.all(np.isfinite(values)):
            raise ValueError(f'{type(self).__name__} must be finite')
        object.__setattr__(self, 'values', values)

    def __getitem__(self, j):
        return self.values[j]

    @classmethod
    def zeros(cls, time, space):
        return cls(time, space, np.zeros((time.n_t + 1, space.n_x)))

    @classmethod
    def from_function(cls, time, space, func):
        """Сэмплирует func(t, x) во всех узлах."""
        x = space.nodes
        return cls(time, space, np.array([func(t, x) for t in time.nodes]))


class ControlField(ValueField):
    """Поле скоростей α(t_j, x_i)."""


def integrate(m, phi):
    """∫φ dm = dx·Σ φ_i m_i."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (m.grid.n_x,):
        raise ValueError(
            f'phi must have {m.grid.n_x} samples, got shape {phi.shape}'
        )
    return float(m.grid.dx * np.dot(phi, m.density))


def d_dx(f, grid):
    """Центральная разность с периодическим замыканием.

    Мода Найквиста (-1)^i неотличима от нуля для этого шаблона: результат 0.
    """
    f = grid.check(f, 'f')
    return (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2 * grid.dx)


def laplacian(f, grid):
    """Трехточечный периодический шаблон (1, -2, 1)/dx²."""
    f = grid.check(f, 'f')
    return (
        np.roll(f, -1, axis=-1) - 2 * f + np.roll(f, 1, axis=-1)
    ) / grid.dx ** 2


def one_sided_gradients(f, grid):
    """Пара (p⁻, p⁺): разности назад и вперед."""
    f = grid.check(f, 'f')
    forward = (np.roll(f, -1, axis=-1) - f) / grid.dx
    return np.roll(forward, 1, axis=-1), forward


def heat_semigroup(f, grid, t):
    """P_t f = e^{tΔ} f, точный фурье-множитель на торе."""
    f = grid.check(f, 'f')
    multiplier = np.exp(-grid.wavenumbers ** 2 * t)
    spectrum = np.fft.rfft(f, axis=-1) * multiplier
    return np.fft.irfft(spectrum, n=grid.n_x, axis=-1)


def spectral_derivative(f, grid):
    f = grid.check(f, 'f')
    symbol = 1j * grid.wavenumbers
    if grid.n_x % 2 == 0:
        symbol[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(f, axis=-1) * symbol, n=grid.n_x, axis=-1)


@lru_cache(maxsize=32)
def implicit_heat_solver(grid, dt):
    """Решатель (I - dt·Δ_h) y = b: трехдиагональная матрица с углами."""
    n = grid.n_x
    ratio = dt / grid.dx ** 2
    matrix = sparse.diags(
        [-ratio, 1 + 2 * ratio, -ratio], [-1, 0, 1], shape=(n, n), format='lil'
    )
    matrix[0, n - 1] = -ratio
    matrix[n - 1, 0] = -ratio
    solve = factorized(matrix.tocsc())

    def apply(rhs):
        return solve(np.ascontiguousarray(rhs, dtype=float))

    return apply


def substep_count(dt, dx, speed, cfl=1.0):
    """Число подшагов явной части, при котором dt_s·speed ≤ cfl·dx."""
    if not np.isfinite(speed):
        return 1
    return max(1, math.ceil(dt * speed / (cfl * dx) - 1e-12))
