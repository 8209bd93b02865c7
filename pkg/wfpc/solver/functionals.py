"""Цилиндрические функционалы Φ(m) = F(∫φ_1 dm, ..., ∫φ_k dm).

Внутренние функции - тригонометрические многочлены на торе: моменты и
δΦ/δm берутся по их значениям в узлах, а внутренние производные D_mΦ и
div D_mΦ - спектральным дифференцированием δΦ/δm на той же сетке.
Классы сериализуются pickle и передаются в рабочие процессы развертки.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridMeasure, spectral_derivative

Q_DISTANCE_MODES = 16


@dataclass(frozen=True)
class FourierSeries:
    """(1 + time_slope·t)·(c + Σ a_k cos(2πkx/L) + Σ b_k sin(2πkx/L)).

    cosines и sines - кортежи пар (k, амплитуда), k ≥ 1.
    """
    constant: float = 0.0
    cosines: tuple = ()
    sines: tuple = ()
    length: float = 1.0
    time_slope: float = 0.0

    @classmethod
    def cosine(cls, mode=1, amplitude=1.0, length=1.0):
        return cls(cosines=((mode, amplitude),), length=length)

    @classmethod
    def sine(cls, mode=1, amplitude=1.0, length=1.0):
        return cls(sines=((mode, amplitude),), length=length)

    def derivative(self, x, order=1, t=0.0):
        """d^order/dx^order; order=0 дает само значение."""
        x = np.asarray(x, dtype=float)
        result = np.full_like(x, self.constant if order == 0 else 0.0)
        shift = order * np.pi / 2
        for mode, amplitude in self.cosines:
            omega = 2 * np.pi * mode / self.length
            scale = amplitude * omega ** order
            result = result + scale * np.cos(omega * x + shift)
        for mode, amplitude in self.sines:
            omega = 2 * np.pi * mode / self.length
            scale = amplitude * omega ** order
            result = result + scale * np.sin(omega * x + shift)
        return (1.0 + self.time_slope * t) * result

    def __call__(self, x, t=0.0):
        return self.derivative(x, order=0, t=t)


@dataclass(frozen=True)
class Affine:
    """F(s) = Σ w_i s_i - offset."""
    weights: tuple = (1.0,)
    offset: float = 0.0

    def value(self, moments):
        return float(np.dot(self.weights, moments) - self.offset)

    def gradient(self, moments):
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class HalfSquare:
    """F(s) = ½·weight·(s_1 - target)²."""
    weight: float = 1.0
    target: float = 0.0

    def value(self, moments):
        return 0.5 * self.weight * (moments[0] - self.target) ** 2

    def gradient(self, moments):
        return np.array([self.weight * (moments[0] - self.target)])


@dataclass(frozen=True)
class Constant:
    level: float = 0.0

    def value(self, moments):
        return self.level

    def gradient(self, moments):
        return np.zeros(len(moments))


@dataclass(frozen=True)
class CylindricalFunctional:
    inner: tuple
    outer: object
    name: str = ''

    def inner_values(self, grid, t=0.0):
        return np.array([phi(grid.nodes, t) for phi in self.inner])

    def moments(self, m, t=0.0):
        return m.grid.dx * self.inner_values(m.grid, t) @ m.density

    def __call__(self, m, t=0.0):
        return float(self.outer.value(self.moments(m, t)))

    @property
    def is_linear(self):
        return isinstance(self.outer, (Affine, Constant))


def linear_functional(series, weight=1.0, offset=0.0, name=''):
    return CylindricalFunctional((series,), Affine((weight,), offset), name)


def quadratic_functional(series, weight=1.0, target=0.0, name=''):
    return CylindricalFunctional((series,), HalfSquare(weight, target), name)


def constant_functional(level=0.0, name=''):
    return CylindricalFunctional(
        (FourierSeries(constant=1.0),), Constant(level), name
    )


def evaluate(functional, m, t=0.0):
    return functional(m, t)


def linear_derivative(functional, m, t=0.0):
    """δΦ/δm(m, ·), нормированная условием ∫δΦ/δm dm = 0."""
    moments = functional.moments(m, t)
    gradient = functional.outer.gradient(moments)
    raw = gradient @ functional.inner_values(m.grid, t)
    weighted = m.grid.dx * m.density
    return raw - np.dot(raw, weighted) / weighted.sum()


def intrinsic_derivative(functional, m, t=0.0):
    """D_mΦ(m, ·) = ∂_x δΦ/δm."""
    return spectral_derivative(linear_derivative(functional, m, t), m.grid)


def intrinsic_divergence(functional, m, t=0.0):
    """∂_x D_mΦ(m, ·) = Δ δΦ/δm."""
    return spectral_derivative(intrinsic_derivative(functional, m, t), m.grid)


def _q_modes(grid, n_modes):
    x = grid.nodes
    rows, weights = [], []
    for i in range(n_modes):
        k = i // 2 + 1
        omega = 2 * np.pi * k / grid.length
        rows.append(np.cos(omega * x) if i % 2 == 0 else np.sin(omega * x))
        # ‖φ‖∞ = 1, ‖Dφ‖∞ = ω
        weights.append(2.0 ** -i / (1.0 + 1.0 + omega ** 2))
    return np.array(rows), np.array(weights)


def q_distance(m1, m2, n_modes=Q_DISTANCE_MODES):
    """Взвешенная сумма квадратов (∫φ_i d(m1 - m2))² по словарю гармоник."""
    if m1.grid != m2.grid:
        raise ValueError('measures live on different grids')
    rows, weights = _q_modes(m1.grid, n_modes)
    gaps = m1.grid.dx * rows @ (m1.density - m2.density)
    return float(np.dot(weights, gaps ** 2))


def q_distance_path(path1, path2, n_modes=Q_DISTANCE_MODES):
    """Покомпонентная q-дистанция двух траекторий мер."""
    if path1.space != path2.space or path1.time != path2.time:
        raise ValueError('paths live on different grids')
    rows, weights = _q_modes(path1.space, n_modes)
    gaps = path1.space.dx * (path1.densities - path2.densities) @ rows.T
    return gaps ** 2 @ weights


@dataclass(frozen=True)
class SmoothPlus:
    """C² сглаживание γ_h положительной части с шириной h.

    γ_h(r) = 0 при r ≤ -h, r при r ≥ h; между ними h·(2s³ - s⁴),
    s = (r + h)/(2h). Производная 3s² - 2s³ монотонна на [0, 1].
    """
    width: float = 1e-3

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(
                f'smoothing width must be positive, got {self.width}'
            )

    def value(self, r):
        r = np.asarray(r, dtype=float)
        s = np.clip((r + self.width) / (2 * self.width), 0.0, 1.0)
        inner = self.width * (2 * s ** 3 - s ** 4)
        lower = np.where(r <= -self.width, 0.0, inner)
        return np.where(r >= self.width, r, lower)

    def prime(self, r):
        r = np.asarray(r, dtype=float)
        s = np.clip((r + self.width) / (2 * self.width), 0.0, 1.0)
        return 3 * s ** 2 - 2 * s ** 3


def smooth_plus(r, width):
    return SmoothPlus(width).value(r)


def smooth_plus_prime(r, width):
    return SmoothPlus(width).prime(r)


def psi_plus(value):
    return np.maximum(value, 0.0)


@dataclass(frozen=True)
class ConstraintSpec:
    """Ограничение Ψ(m) ≤ 0 с параметрами трансверсальности η₁, η₂."""
    psi: CylindricalFunctional
    eta1: float
    eta2: float

    def __post_init__(self):
        if not (self.eta1 > 0 and self.eta2 > 0):
            raise ValueError('eta1 and eta2 must be positive')


@dataclass(frozen=True)
class TransversalityReport:
    checked: int
    min_value: float = None
    passed: bool = True
    failures: tuple = field(default=())


def transversality_check(constraint, measures, t=0.0):
    """Проверяет ∫|D_mΨ|² dm > η₂ там, где |Ψ(m)| ≤ η₁."""
    values, failures = [], []
    for index, m in enumerate(measures):
        if abs(constraint.psi(m, t)) > constraint.eta1:
            continue
        grad = intrinsic_derivative(constraint.psi, m, t)
        value = m.grid.dx * float(np.dot(grad ** 2, m.density))
        values.append(value)
        if not value > constraint.eta2:
            failures.append(index)
    return TransversalityReport(
        checked=len(values),
        min_value=min(values) if values else None,
        passed=not failures,
        failures=tuple(failures),
    )


def random_measure(grid, generator, modes=4):
    """Гладкая случайная плотность: экспонента случайного многочлена."""
    x = grid.nodes
    exponent = np.zeros(grid.n_x)
    for k in range(1, modes + 1):
        omega = 2 * np.pi * k / grid.length
        a, b = generator.normal(scale=1.0 / k, size=2)
        exponent += a * np.cos(omega * x) + b * np.sin(omega * x)
    return GridMeasure.from_weights(grid, np.exp(exponent))


def convexity_probe(functional, grid, n_pairs=64, generator=None, t=0.0):
    """Максимум Φ((m1+m2)/2) - (Φ(m1)+Φ(m2))/2 по случайным парам.

    Неположительный результат (с точностью округления) не опровергает
    выпуклость; положительный - найденный контрпример.
    """
    generator = generator or np.random.default_rng(0)
    worst = -math.inf
    for _ in range(n_pairs):
        m1 = random_measure(grid, generator)
        m2 = random_measure(grid, generator)
        middle = GridMeasure(grid, 0.5 * (m1.density + m2.density))
        ends = 0.5 * (functional(m1, t) + functional(m2, t))
        gap = functional(middle, t) - ends
        worst = max(worst, gap)
    return worst


def gradient_sup(functional, m, t=0.0):
    """‖D_mΦ(m, ·)‖∞ на сетке."""
    return float(np.abs(intrinsic_derivative(functional, m, t)).max())
