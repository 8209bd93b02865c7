import numpy as np
import pytest
from django.core.exceptions import ValidationError

from solver.functionals import FourierSeries
from solver.hamiltonian import (
    HamiltonianSpec,
    LogCoshHamiltonian,
    QuadraticHamiltonian,
    legendre_maximizer,
    numerical_hamiltonian,
    validate_assumptions,
    young_gap,
)
from solver.grid import d_dx
from solver.validators import constraint_validator, hamiltonian_validator

MOMENTA = np.linspace(-4.0, 4.0, 17)


class TestLegendre:

    def test_newton_matches_closed_form(self, space):
        spec = QuadraticHamiltonian(drift=FourierSeries.sine(amplitude=0.3))
        x = space.nodes[:, None]
        q = MOMENTA[None, :]
        generic = HamiltonianSpec.lagrangian(spec, x, q)
        assert np.allclose(generic, spec.lagrangian(x, q), atol=1e-10), (
            'Проверьте, что лагранжиан через Ньютона совпадает с явной формулой'
        )

    def test_young_inequality(self, logcosh, space):
        x = space.nodes[:, None, None]
        p = MOMENTA[None, :, None]
        q = MOMENTA[None, None, :]
        assert young_gap(logcosh, x, p, q).min() > -1e-10, (
            'Проверьте неравенство Юнга L + H + p·q ≥ 0'
        )

    def test_young_equality_on_graph(self, logcosh, space):
        x = space.nodes[:, None]
        p = MOMENTA[None, :]
        q = -logcosh.grad_p(x, p)
        assert np.abs(young_gap(logcosh, x, p, q)).max() < 1e-9, (
            'Проверьте равенство при q = -D_pH(x, p)'
        )

    def test_maximizer(self, logcosh):
        x = np.zeros(5)
        q = np.linspace(-2.0, 2.0, 5)
        p = legendre_maximizer(logcosh, x, q)
        assert np.allclose(logcosh.grad_p(x, p), -q, atol=1e-10)

    def test_logcosh_minimum(self, logcosh, space):
        p, value = logcosh.minimum(space.nodes)
        assert np.allclose(p, 0.0) and np.allclose(value, 0.0)


class TestNumericalHamiltonian:

    def test_upwind_is_consistent(self, quadratic, space):
        x = space.nodes
        u = 0.1 * np.sin(2 * np.pi * x)
        value, alpha, _ = numerical_hamiltonian(quadratic, x, u, space)
        exact = 0.5 * (0.2 * np.pi * np.cos(2 * np.pi * x)) ** 2
        assert np.abs(value - exact).max() < 0.05, (
            'Проверьте согласованность схемы Годунова с H(x, Du)'
        )
        assert np.allclose(alpha, -d_dx(u, space), atol=0.1)

    @pytest.mark.parametrize('stencil', ['upwind', 'centered'])
    def test_envelope_identity(self, quadratic, space, stencil):
        generator = np.random.default_rng(5)
        x = space.nodes
        u = 0.1 * generator.standard_normal(space.n_x)
        value, alpha, _ = numerical_hamiltonian(quadratic, x, u, space, stencil)
        if stencil == 'upwind':
            forward = (np.roll(u, -1) - u) / space.dx
            backward = np.roll(forward, 1)
            transport = -(np.maximum(alpha, 0) * forward + np.minimum(alpha, 0) * backward)
        else:
            transport = -alpha * d_dx(u, space)
        assert np.allclose(value, transport - quadratic.lagrangian(x, alpha), atol=1e-10), (
            'Проверьте тождество H_h = (Aᵀu) - L(x, α)'
        )

    def test_unknown_stencil(self, quadratic, space):
        with pytest.raises(ValueError):
            numerical_hamiltonian(quadratic, space.nodes, np.zeros(space.n_x), space, 'weno')


class TestAssumptions:

    def test_catalog_hamiltonians_pass(self, quadratic, logcosh, space):
        for spec in (quadratic, logcosh):
            report = validate_assumptions(spec, space.nodes, np.linspace(-10, 10, 201))
            assert report.passed, f'Проверьте предположения для {spec!r}'
            assert report.growth_required < 2.0

    def test_validator_rejects_small_growth_constant(self, space):
        with pytest.raises(ValidationError):
            hamiltonian_validator(QuadraticHamiltonian(growth_constant=1.0), space)

    def test_validator_rejects_small_convexity(self, space):
        spec = LogCoshHamiltonian(strength=0.5, convexity=1.2)
        with pytest.raises(ValidationError):
            hamiltonian_validator(spec, space)

    def test_constraint_validator(self, constraint, uniform, bump):
        constraint_validator(constraint, uniform)
        with pytest.raises(ValidationError):
            constraint_validator(constraint, bump)

    def test_invalid_constants(self):
        with pytest.raises(ValueError):
            QuadraticHamiltonian(growth_constant=0.0)
        with pytest.raises(ValueError):
            QuadraticHamiltonian(convexity=0.5)
