"""Стохастический оракул: метод Эйлера-Маруямы для dX = α dt + √2 dB
и поток Маккина-Власова, толкающий меру внутрь ограничения.

Генератор - numpy Philox (счетчиковый) с отдельным потоком на каждый
блок частиц, поэтому прогон полностью определяется seed.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .functionals import intrinsic_derivative, intrinsic_divergence
from .grid import GridMeasure, MeasurePath, integrate

logger = logging.getLogger(__name__)

MIN_PARTICLES = 100
PARTICLE_BLOCK = 1024


def make_generator(seed):
    return np.random.Generator(np.random.Philox(seed))


class ParticleStreams:
    """Потоки Philox, разбитые по блокам из PARTICLE_BLOCK частиц.

    Ключ блока - дочерний SeedSequence(seed) с номером блока, так что
    числа частицы не зависят от того, как блоки раздаются исполнителям.
    """

    def __init__(self, seed, count):
        blocks = math.ceil(count / PARTICLE_BLOCK)
        children = np.random.SeedSequence(seed).spawn(blocks)
        self.count = count
        self.generators = [make_generator(child) for child in children]
        self.sizes = [
            min(PARTICLE_BLOCK, count - index * PARTICLE_BLOCK)
            for index in range(blocks)
        ]

    def _draw(self, method, size):
        if size != self.count:
            raise ValueError(
                f'streams serve {self.count} particles, asked for {size}'
            )
        return np.concatenate([
            getattr(generator, method)(block)
            for generator, block in zip(self.generators, self.sizes)
        ])

    def random(self, size):
        return self._draw('random', size)

    def standard_normal(self, size):
        return self._draw('standard_normal', size)


def _wrap(positions, length):
    positions = np.mod(positions, length)
    return np.where(positions >= length, positions - length, positions)


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    positions: np.ndarray
    seed: int
    length: float = 1.0

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float)
        if positions.ndim != 1:
            raise ValueError('positions must be a flat array')
        outside = positions.size and (
            positions.min() < 0 or positions.max() >= self.length
        )
        if outside:
            raise ValueError(f'positions must lie in [0, {self.length})')
        positions.setflags(write=False)
        object.__setattr__(self, 'positions', positions)

    @property
    def size(self):
        return self.positions.size

    def histogram(self, space):
        """Эмпирическая мера: каждая частица уходит в ближайший узел."""
        return histogram(self.positions, space)


def histogram(positions, space):
    cells = np.rint(positions / space.dx).astype(int) % space.n_x
    counts = np.bincount(cells, minlength=space.n_x)
    return GridMeasure(space, counts / (positions.size * space.dx))


def sample_initial(initial, count, generator):
    """Обратная функция распределения по ячейкам узлов.

    Внутри ячейки частица сдвигается равномерно.
    """
    space = initial.grid
    weights = np.cumsum(space.dx * initial.density)
    uniforms = generator.random(count) * weights[-1]
    cells = np.searchsorted(weights, uniforms, side='right')
    cells = np.minimum(cells, space.n_x - 1)
    offsets = generator.random(count) - 0.5
    return _wrap((cells + offsets) * space.dx, space.length)


def _drift(field_row, positions, space):
    return np.interp(positions, space.nodes, field_row, period=space.length)


@dataclass(frozen=True, eq=False)
class ParticleRun:
    path: MeasurePath
    ensemble: ParticleEnsemble
    kinetic: float = math.nan


def simulate_sde(alpha, initial, count, seed, hamiltonian=None):
    """Эмпирический путь мер для X ← X + α(t, X)dt + √(2dt)ξ.

    С hamiltonian дополнительно оценивается ∫∫L(x, α) dm dt методом
    Монте-Карло (левые прямоугольники, как в total_cost).
    """
    if count < MIN_PARTICLES:
        raise ValueError(
            f'at least {MIN_PARTICLES} particles required, got {count}'
        )
    time, space = alpha.time, alpha.space
    generator = ParticleStreams(seed, count)
    positions = sample_initial(initial, count, generator)
    densities = [histogram(positions, space).density]
    kinetic = 0.0
    noise = math.sqrt(2 * time.dt)
    for j in range(time.n_t):
        velocity = _drift(alpha.values[j], positions, space)
        if hamiltonian is not None:
            cost = hamiltonian.lagrangian(positions, velocity)
            kinetic += time.dt * float(np.mean(cost))
        step = velocity * time.dt + noise * generator.standard_normal(count)
        positions = _wrap(positions + step, space.length)
        densities.append(histogram(positions, space).density)
    return ParticleRun(
        path=MeasurePath(time, space, np.array(densities)),
        ensemble=ParticleEnsemble(positions, seed, space.length),
        kinetic=kinetic if hamiltonian is not None else math.nan,
    )


def steering_threshold(constraint, measures, t=0.0):
    """max ‖div D_mΨ(m)‖∞ / η₂ по заданным мерам."""
    worst = max(
        float(np.abs(intrinsic_divergence(constraint.psi, m, t)).max())
        for m in measures
    )
    return worst / constraint.eta2


@dataclass(frozen=True, eq=False)
class SteeringRun:
    path: MeasurePath
    psi: np.ndarray
    gain: float
    threshold: float
    bound: float

    @property
    def excess(self):
        """max_t Ψ(m̂(t)) - max(Ψ(m₀), -η₁)."""
        return float(self.psi.max() - self.bound)


def steering_flow(constraint, gain, initial, count, seed, time):
    """Частицы с дрейфом -C·D_mΨ(m̂(t), X), m̂ - текущая эмпирическая мера."""
    if count < MIN_PARTICLES:
        raise ValueError(
            f'at least {MIN_PARTICLES} particles required, got {count}'
        )
    space = initial.grid
    psi = constraint.psi
    threshold = steering_threshold(
        constraint, [initial, GridMeasure.uniform(space)]
    )
    if gain <= threshold:
        logger.warning(
            'steering gain %.4g is below the threshold %.4g; '
            'the bound is not guaranteed',
            gain, threshold,
        )
    generator = ParticleStreams(seed, count)
    positions = sample_initial(initial, count, generator)
    noise = math.sqrt(2 * time.dt)
    densities, series = [], []
    for j, t in enumerate(time.nodes):
        empirical = histogram(positions, space)
        densities.append(empirical.density)
        series.append(psi(empirical, t))
        if j == time.n_t:
            break
        gradient = intrinsic_derivative(psi, empirical, t)
        velocity = -gain * _drift(gradient, positions, space)
        step = velocity * time.dt + noise * generator.standard_normal(count)
        positions = _wrap(positions + step, space.length)
    return SteeringRun(
        path=MeasurePath(time, space, np.array(densities)),
        psi=np.array(series),
        gain=gain,
        threshold=threshold,
        bound=max(psi(initial), -constraint.eta1),
    )


def sampling_noise(functional_inner, initial, count):
    """Стандартная ошибка ∫φ dm̂ для N независимых частиц из m₀."""
    values = functional_inner(initial.grid.nodes)
    mean = integrate(initial, values)
    variance = max(integrate(initial, values ** 2) - mean ** 2, 0.0)
    return math.sqrt(variance / count)


def ito_check(functional, path, alpha):
    """max_t |U(t, m(t)) - U(0, m(0)) - ∫[∂_tU + ∫(D_mU·α + div D_mU) dm] ds|.

    ∂_tU на шаге - приращение U(·, m(t_j)) от t_j до t_{j+1}: для
    множителя (1 + time_slope·t) оно точное.
    """
    time = path.time
    nodes = time.nodes
    start = functional(path[0], nodes[0])
    accumulated, defect = 0.0, 0.0
    for j in range(time.n_t):
        m, t = path[j], nodes[j]
        gradient = intrinsic_derivative(functional, m, t)
        drift = integrate(m, gradient * alpha.values[j])
        diffusion = integrate(m, intrinsic_divergence(functional, m, t))
        explicit = functional(m, nodes[j + 1]) - functional(m, t)
        accumulated += explicit + time.dt * (drift + diffusion)
        change = functional(path[j + 1], nodes[j + 1]) - start
        defect = max(defect, abs(change - accumulated))
    return defect


def wasserstein_circle(m1, m2):
    """W₁ на окружности: dx·Σ|F - G - c|.

    c - медиана разности функций распределения.
    """
    if m1.grid != m2.grid:
        raise ValueError('measures live on different grids')
    dx = m1.grid.dx
    difference = dx * np.cumsum(m1.density - m2.density)
    return float(dx * np.abs(difference - np.median(difference)).sum())


def path_wasserstein(path1, path2):
    return np.array([
        wasserstein_circle(path1[j], path2[j]) for j in range(len(path1))
    ])
