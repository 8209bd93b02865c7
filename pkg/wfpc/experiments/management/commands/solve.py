from django.core.management.base import CommandError

from experiments.records import envelope
from experiments.serializers import (
    CertificateSerializer,
    CostReportSerializer,
    RoundRecordSerializer,
    TransversalitySerializer,
    ValueReportSerializer,
)
from solver import diagnostics
from solver.exceptions import SolverError
from solver.functionals import transversality_check
from solver.penalized import mechanism, solve_penalized, solve_unconstrained

from ._base import ExperimentCommand


class Command(ExperimentCommand):
    """Один штрафной расчет при (ε, δ) из секции penalty.

    Пишет solve.json и ряды psi.dat, nu.dat, lip_t.dat, psi_dot.dat.
    Если фиктивная игра не сошлась, результаты все равно записываются,
    а команда завершается с ошибкой.
    """
    help = 'Solves the penalized control problem for one (epsilon, delta)'

    def run(self, experiment, writer, jobs):
        problem = experiment.problem
        penalty = experiment.section('penalty')
        epsilon, delta = penalty['epsilon'], penalty['delta']
        try:
            solution = solve_penalized(problem, epsilon, delta)
            reference = solve_unconstrained(problem)
        except SolverError as error:
            writer.json('solve.json', envelope(
                'solve', experiment,
                epsilon=epsilon,
                delta=delta,
                error=str(error),
                round=getattr(error, 'round', None),
                step=getattr(error, 'step', None),
            ))
            raise CommandError(f'Solver failed: {error}') from error

        psi = problem.constraint.psi
        time = problem.time
        series = diagnostics.psi_trajectory(psi, solution.path)
        lip_t, lip_x = diagnostics.control_lipschitz(solution.control)
        leading, remainder = mechanism(problem, solution)
        slices = [solution.path[j] for j in range(len(solution.path))]
        transversality = transversality_check(problem.constraint, slices)
        writer.json('solve.json', envelope(
            'solve', experiment,
            epsilon=epsilon,
            delta=delta,
            converged=solution.converged,
            rounds=solution.rounds,
            response_gap=solution.response_gap,
            max_psi=series.max(),
            terminal_psi=series[-1],
            cost=CostReportSerializer(solution.cost).data,
            unconstrained_cost=reference.cost.total,
            constraint_cost=solution.cost.total - reference.cost.total,
            multiplier_l1=diagnostics.multiplier_l1(
                solution.multipliers, time
            ),
            terminal_multiplier=solution.multipliers.eta,
            complementarity=diagnostics.complementarity_residual(
                solution.multipliers, series, time, problem.smoothing.width
            ),
            exclusion=diagnostics.exclusion_residual(
                solution.multipliers, series, problem.smoothing.width
            ),
            lip_t=lip_t,
            lip_x=lip_x,
            leading_max=leading,
            remainder_max=remainder,
            value=ValueReportSerializer(diagnostics.value_report(
                solution.u, solution.path, solution.cost
            )).data,
            certificate=CertificateSerializer(solution.certificate).data,
            transversality=TransversalitySerializer(transversality).data,
            hjb_residual=solution.hjb.residual,
            hjb_substeps=max(solution.hjb.substeps),
            history=RoundRecordSerializer(solution.history, many=True).data,
        ))
        nodes = time.nodes
        writer.series('psi.dat', nodes, series, header='t psi')
        writer.series('nu.dat', nodes, solution.multipliers.nu, header='t nu')
        writer.series(
            'lip_t.dat', nodes[:-1],
            diagnostics.lipschitz_quotients(solution.control), header='t lip_t'
        )
        writer.series('psi_dot.dat', nodes, diagnostics.psi_dot_series(
            problem.hamiltonian, psi, solution.u, solution.path
        ), header='t psi_dot')

        summary = (
            f'J = {solution.cost.total:.6g}, max Psi = {series.max():.3e}, '
            f'{solution.rounds} rounds'
        )
        if not solution.converged:
            self.stdout.write(self.style.WARNING(summary))
            raise CommandError(
                f'Fictitious play did not converge '
                f'in {problem.max_rounds} rounds '
                f'(eps={epsilon:g}, delta={delta:g})'
            )
        self.stdout.write(self.style.SUCCESS(summary))
