"""Гамильтонианы H(x, p), лагранжиан через преобразование Лежандра
и численные (монотонные) гамильтонианы для разностных схем.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import LegendreConvergenceError
from .functionals import FourierSeries
from .grid import d_dx, one_sided_gradients

logger = logging.getLogger(__name__)

STENCILS = ('upwind', 'centered')


class HamiltonianSpec:
    """База каталога: H, D_pH, D_ppH, D_xH и константы C₀, μ.

    Подклассы переопределяют value, grad_p, hess_pp, grad_x; lagrangian
    и minimum по умолчанию считаются методом Ньютона.
    """
    name = 'generic'

    def __init__(self, growth_constant, convexity=1.0):
        if not growth_constant > 0:
            raise ValueError(
                f'growth constant must be positive, got {growth_constant}'
            )
        if convexity < 1:
            raise ValueError(
                f'convexity constant must be >= 1, got {convexity}'
            )
        self.growth_constant = float(growth_constant)
        self.convexity = float(convexity)

    def value(self, x, p):
        raise NotImplementedError

    def grad_p(self, x, p):
        raise NotImplementedError

    def hess_pp(self, x, p):
        raise NotImplementedError

    def grad_x(self, x, p):
        raise NotImplementedError

    def lagrangian(self, x, q):
        x, q = np.broadcast_arrays(np.asarray(x, float), np.asarray(q, float))
        p = legendre_maximizer(self, x, q)
        return -p * q - self.value(x, p)

    def minimum(self, x):
        """(p*, H(x, p*)) с D_pH(x, p*) = 0; H(x, p*) = -L(x, 0)."""
        x = np.asarray(x, dtype=float)
        p = legendre_maximizer(self, x, np.zeros_like(x))
        return p, self.value(x, p)

    def __repr__(self):
        return (
            f'{type(self).__name__}(C0={self.growth_constant}, '
            f'mu={self.convexity})'
        )


class QuadraticHamiltonian(HamiltonianSpec):
    """H(x, p) = ½p² + b(x)p + V(x); L(x, q) = ½(q + b(x))² - V(x)."""
    name = 'quadratic'

    def __init__(self, drift=None, potential=None, growth_constant=2.0,
                 convexity=1.0):
        super().__init__(growth_constant, convexity)
        self.drift = drift or FourierSeries()
        self.potential = potential or FourierSeries()

    def value(self, x, p):
        return 0.5 * p ** 2 + self.drift(x) * p + self.potential(x)

    def grad_p(self, x, p):
        return p + self.drift(x)

    def hess_pp(self, x, p):
        return np.ones(np.broadcast(np.asarray(x), np.asarray(p)).shape)

    def grad_x(self, x, p):
        return self.drift.derivative(x) * p + self.potential.derivative(x)

    def lagrangian(self, x, q):
        return 0.5 * (q + self.drift(x)) ** 2 - self.potential(x)

    def minimum(self, x):
        b = self.drift(x)
        return -b, self.potential(x) - 0.5 * b ** 2


class LogCoshHamiltonian(HamiltonianSpec):
    """H(x, p) = ½p² + a·log cosh p + V(x), 1 ≤ D_ppH ≤ 1 + a."""
    name = 'logcosh'

    def __init__(self, strength=1.0, potential=None, growth_constant=2.0,
                 convexity=None):
        if strength < 0:
            raise ValueError(f'strength must be nonnegative, got {strength}')
        super().__init__(growth_constant, convexity or 1.0 + strength)
        self.strength = float(strength)
        self.potential = potential or FourierSeries()

    def value(self, x, p):
        log_cosh = np.logaddexp(p, -p) - np.log(2.0)
        return 0.5 * p ** 2 + self.strength * log_cosh + self.potential(x)

    def grad_p(self, x, p):
        return p + self.strength * np.tanh(p) + 0.0 * np.asarray(x)

    def hess_pp(self, x, p):
        return 1.0 + self.strength / np.cosh(p) ** 2 + 0.0 * np.asarray(x)

    def grad_x(self, x, p):
        return self.potential.derivative(x) + 0.0 * np.asarray(p)

    def minimum(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x), self.potential(x)


def legendre_maximizer(spec, x, q, tol=1e-12, max_iter=50):
    """argmax_p {-p·q - H(x, p)}: корень D_pH(x, p) = -q.

    Ньютон от p = -q; узлы, где он не сошелся, досчитываются brentq
    на отрезке, гарантированном оценкой D_ppH ≥ 1/μ.
    """
    x, q = np.broadcast_arrays(np.asarray(x, float), np.asarray(q, float))
    p = -q.astype(float)
    converged = np.zeros(p.shape, dtype=bool)
    for _ in range(max_iter):
        step = (spec.grad_p(x, p) + q) / spec.hess_pp(x, p)
        step = np.where(converged | ~np.isfinite(step), 0.0, step)
        p = p - step
        converged |= np.abs(step) <= tol * (1.0 + np.abs(p))
        if converged.all():
            return p
    pending = np.flatnonzero(~converged.ravel())
    logger.debug(
        'Newton left %d Legendre nodes, switching to brentq', pending.size
    )
    flat_p, flat_x, flat_q = p.ravel().copy(), x.ravel(), q.ravel()
    for index in pending:
        flat_p[index] = _bracketed_root(spec, flat_x[index], flat_q[index])
    return flat_p.reshape(p.shape)


def _bracketed_root(spec, x, q):
    def residual(p):
        return float(spec.grad_p(x, p) + q)

    radius = spec.convexity * (abs(residual(-q)) + 1.0)
    low, high = -q - radius, -q + radius
    try:
        return brentq(residual, low, high, xtol=1e-14, maxiter=200)
    except (ValueError, RuntimeError) as error:
        raise LegendreConvergenceError(
            f'Legendre transform failed at x={x:.6g}, q={q:.6g}: {error}'
        ) from error


def lagrangian(spec, x, q):
    return spec.lagrangian(x, q)


def young_gap(spec, x, p, q):
    """L(x, q) + H(x, p) + p·q ≥ 0, ноль на графике q = -D_pH(x, p)."""
    return spec.lagrangian(x, q) + spec.value(x, p) + p * q


def numerical_hamiltonian(spec, x, u, grid, stencil='upwind'):
    """Численный гамильтониан H_h(x, Du), обратная связь α и скорость переноса.

    upwind: схема Годунова для выпуклого H,
    H_h = max(H(x, min(p⁺, p*)), H(x, max(p⁻, p*))), монотонна при
    dt·max|D_pH| ≤ dx. centered: H(x, Du) с центральной разностью.
    В обоих случаях H_h = (Aᵀu) - L(x, α), где A - поток Фоккера-Планка
    того же шаблона.
    """
    if stencil == 'centered':
        p = d_dx(u, grid)
        alpha = -spec.grad_p(x, p)
        return spec.value(x, p), alpha, np.abs(alpha)
    if stencil != 'upwind':
        raise ValueError(
            f'unknown stencil {stencil!r}, expected one of {STENCILS}'
        )
    p_minus, p_plus = one_sided_gradients(u, grid)
    p_star, _ = spec.minimum(x)
    forward = np.minimum(p_plus, p_star)
    backward = np.maximum(p_minus, p_star)
    h_forward = spec.value(x, forward)
    h_backward = spec.value(x, backward)
    use_backward = h_backward > h_forward
    value = np.where(use_backward, h_backward, h_forward)
    alpha = -spec.grad_p(x, np.where(use_backward, backward, forward))
    speed = np.maximum(
        np.abs(spec.grad_p(x, p_plus)), np.abs(spec.grad_p(x, p_minus))
    )
    return value, alpha, speed


@dataclass(frozen=True)
class HamiltonianReport:
    growth_required: float
    lipschitz_required: float
    convexity_required: float
    growth_constant: float
    convexity: float

    @property
    def passed(self):
        return (
            self.growth_required <= self.growth_constant
            and self.lipschitz_required <= self.growth_constant
            and self.convexity_required <= self.convexity
        )


def validate_assumptions(spec, x, p):
    """Минимальные константы, при которых на сетке (x, p) выполнены
    двусторонний квадратичный рост, оценка |D_xH| ≤ C₀(1 + |p|)
    и 1/μ ≤ D_ppH ≤ μ.
    """
    x, p = np.meshgrid(
        np.asarray(x, float), np.asarray(p, float), indexing='ij'
    )
    h = spec.value(x, p)
    squared = p ** 2
    upper = h / (squared + 1.0)
    # C⁻¹p² - C ≤ H  ⟺  C² + H·C - p² ≥ 0
    lower = (-h + np.sqrt(h ** 2 + 4 * squared)) / 2.0
    growth = float(max(upper.max(), lower.max()))
    lipschitz = float((np.abs(spec.grad_x(x, p)) / (1.0 + np.abs(p))).max())
    hessian = spec.hess_pp(x, p)
    convexity = float(max(hessian.max(), (1.0 / hessian).max()))
    return HamiltonianReport(
        growth_required=growth,
        lipschitz_required=lipschitz,
        convexity_required=convexity,
        growth_constant=spec.growth_constant,
        convexity=spec.convexity,
    )
