"""Диагностики траектории ограничения, множителей и управления."""
from dataclasses import dataclass

import numpy as np

from .exceptions import CrossingError
from .functionals import intrinsic_derivative, intrinsic_divergence
from .grid import d_dx, integrate


def psi_trajectory(psi, path):
    """Ψ(m(t_j), t_j) вдоль траектории."""
    return np.array([psi(path[j], t) for j, t in enumerate(path.time.nodes)])


def psi_dot(hamiltonian, psi, u, path, j):
    """d/dt Ψ(m(t_j)) = -∫D_mΨ·D_pH(x, Du) dm + ∫div D_mΨ dm."""
    time, space = path.time, path.space
    t, m = time.nodes[j], path[j]
    alpha = -hamiltonian.grad_p(space.nodes, d_dx(u.values[j], space))
    transport = integrate(m, intrinsic_derivative(psi, m, t) * alpha)
    return transport + integrate(m, intrinsic_divergence(psi, m, t))


def psi_dot_series(hamiltonian, psi, u, path):
    return np.array([
        psi_dot(hamiltonian, psi, u, path, j) for j in range(len(path))
    ])


def psi_ddot_leading(hamiltonian, psi, u, path, multipliers, j, band=0.0):
    """Коэрцитивный член ν∫D_mΨ·D_ppH·D_mΨ dm и остаток.

    Остаток - центральная разность psi_dot минус главный член. Узлы,
    где Ψ∘m меняет знак или |Ψ| ≤ band, отклоняются CrossingError.
    """
    time, space = path.time, path.space
    if not 0 < j < time.n_t:
        raise ValueError(f'interior time index required, got {j}')
    nodes = time.nodes
    values = [psi(path[k], nodes[k]) for k in (j - 1, j, j + 1)]
    if min(values) <= 0.0 <= max(values) or abs(values[1]) <= band:
        raise CrossingError(
            f'Psi(m(t)) crosses zero near t={nodes[j]:.6g}; '
            'second derivative undefined there'
        )
    m = path[j]
    gradient = intrinsic_derivative(psi, m, nodes[j])
    hessian = hamiltonian.hess_pp(space.nodes, d_dx(u.values[j], space))
    leading = multipliers.nu[j] * integrate(m, gradient * hessian * gradient)
    total = (
        psi_dot(hamiltonian, psi, u, path, j + 1)
        - psi_dot(hamiltonian, psi, u, path, j - 1)
    ) / (2 * time.dt)
    return leading, total - leading


def complementarity_residual(multipliers, psi_series, time, width):
    """∫ν·max(-Ψ - h, 0) dt + η·max(-Ψ(T) - h, 0)."""
    psi_series = np.asarray(psi_series, dtype=float)
    slack = np.maximum(-psi_series - width, 0.0)
    running = time.integral(multipliers.nu * slack)
    return running + multipliers.eta * max(-psi_series[-1] - width, 0.0)


def exclusion_residual(multipliers, psi_series, width):
    """Нарушение λ = 0 при Ψ < -h и λ = 1 при Ψ > h, включая β в T."""
    psi_series = np.asarray(psi_series, dtype=float)
    lam = np.append(multipliers.lam, multipliers.beta)
    psi = np.append(psi_series, psi_series[-1])
    below = lam * np.maximum(-psi - width, 0.0)
    above = (1.0 - lam) * np.maximum(psi - width, 0.0)
    return float(max(below.max(), above.max()))


def multiplier_l1(multipliers, time):
    return time.integral(multipliers.nu) + multipliers.eta


def control_lipschitz(alpha):
    """Максимальные разностные отношения α по t и по x."""
    values = alpha.values
    lip_t = np.abs(np.diff(values, axis=0)).max() / alpha.time.dt
    lip_x = np.abs(np.roll(values, -1, axis=1) - values).max() / alpha.space.dx
    return float(lip_t), float(lip_x)


def lipschitz_quotients(alpha):
    """Ряд max_x |α(t_{j+1}) - α(t_j)|/dt для файла lip_t.dat."""
    return np.abs(np.diff(alpha.values, axis=0)).max(axis=1) / alpha.time.dt


@dataclass(frozen=True)
class ValueReport:
    lhs: float
    rhs: float

    @property
    def gap(self):
        return abs(self.lhs - self.rhs)


def value_report(u, path, cost):
    """∫u(0) dm₀ + ∫f dt + g(m_T) против J."""
    lhs = integrate(path.initial, u.values[0]) + cost.running + cost.terminal
    return ValueReport(lhs=lhs, rhs=cost.total)
