from rest_framework import serializers

from experiments import catalog
from solver.validators import constraint_validator, hamiltonian_validator

STENCIL_CHOICES = ('upwind', 'centered')
FUNCTIONAL_KINDS = ('linear', 'quadratic', 'constant')
HAMILTONIAN_KINDS = ('quadratic', 'logcosh')
INITIAL_KINDS = ('uniform', 'bump', 'mode')
PAIRINGS = ('zip', 'grid')


def positive(value):
    if not value > 0:
        raise serializers.ValidationError(
            'Значение должно быть положительным.'
        )
    return value


def decreasing(values):
    if list(values) != sorted(values, reverse=True):
        raise serializers.ValidationError(
            'Список должен быть упорядочен по убыванию.'
        )
    return values


class ModeAmplitudeField(serializers.ListField):
    """Пара [k, амплитуда] с целым k ≥ 1."""
    child = serializers.FloatField()

    def __init__(self, **kwargs):
        super().__init__(min_length=2, max_length=2, **kwargs)

    def to_internal_value(self, data):
        mode, amplitude = super().to_internal_value(data)
        if mode < 1 or mode != int(mode):
            raise serializers.ValidationError(
                'Номер гармоники должен быть натуральным числом.'
            )
        return [int(mode), amplitude]


class FourierSeriesSerializer(serializers.Serializer):
    constant = serializers.FloatField(default=0.0)
    cosines = serializers.ListField(child=ModeAmplitudeField(), default=list)
    sines = serializers.ListField(child=ModeAmplitudeField(), default=list)
    time_slope = serializers.FloatField(default=0.0)


class GridSerializer(serializers.Serializer):
    horizon = serializers.FloatField(validators=[positive])
    n_t = serializers.IntegerField(min_value=2)
    n_x = serializers.IntegerField(min_value=8)
    length = serializers.FloatField(default=1.0, validators=[positive])


class FunctionalSerializer(serializers.Serializer):
    """Функционал каталога.

    linear: weight·∫φ dm - offset; quadratic: ½·weight·(∫φ dm - target)²;
    constant: value.
    """
    kind = serializers.ChoiceField(choices=FUNCTIONAL_KINDS)
    inner = FourierSeriesSerializer(required=False)
    weight = serializers.FloatField(default=1.0)
    offset = serializers.FloatField(default=0.0)
    target = serializers.FloatField(default=0.0)
    value = serializers.FloatField(default=0.0)

    def validate(self, attrs):
        if attrs['kind'] != 'constant' and 'inner' not in attrs:
            raise serializers.ValidationError({
                'inner': 'Для функционала этого вида нужна внутренняя функция.'
            })
        if attrs['kind'] == 'quadratic' and attrs['weight'] < 0:
            raise serializers.ValidationError({
                'weight': 'Вес квадратичного функционала '
                          'не может быть отрицательным.'
            })
        return attrs


class ConstraintSerializer(FunctionalSerializer):
    eta1 = serializers.FloatField(validators=[positive])
    eta2 = serializers.FloatField(validators=[positive])

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get('inner', {}).get('time_slope', 0.0):
            raise serializers.ValidationError(
                {'inner': 'Ограничение не должно зависеть от времени.'}
            )
        return attrs


class HamiltonianSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=HAMILTONIAN_KINDS)
    drift = FourierSeriesSerializer(required=False)
    potential = FourierSeriesSerializer(required=False)
    strength = serializers.FloatField(default=0.0, min_value=0.0)
    growth_constant = serializers.FloatField(
        default=2.0, validators=[positive]
    )
    convexity = serializers.FloatField(required=False, min_value=1.0)
    momentum_box = serializers.FloatField(default=10.0, validators=[positive])

    def validate(self, attrs):
        if attrs['kind'] == 'logcosh' and 'drift' in attrs:
            raise serializers.ValidationError(
                {'drift': 'Гамильтониан logcosh не поддерживает дрейф b(x).'}
            )
        return attrs


class InitialSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=INITIAL_KINDS, default='uniform')
    center = serializers.FloatField(default=0.5)
    width = serializers.FloatField(default=0.1, validators=[positive])
    mode = serializers.IntegerField(default=1, min_value=1)
    amplitude = serializers.FloatField(default=0.5)

    def validate(self, attrs):
        if attrs['kind'] == 'mode' and abs(attrs['amplitude']) > 1:
            raise serializers.ValidationError({
                'amplitude': 'Плотность 1 + a·cos должна быть '
                             'неотрицательной: |a| ≤ 1.'
            })
        return attrs


class SolverSerializer(serializers.Serializer):
    stencil = serializers.ChoiceField(
        choices=STENCIL_CHOICES, default='upwind'
    )
    smoothing = serializers.FloatField(default=1e-3, validators=[positive])
    tol_fp = serializers.FloatField(default=1e-8, validators=[positive])
    tol_lambda = serializers.FloatField(default=1e-3, validators=[positive])
    max_rounds = serializers.IntegerField(default=200, min_value=1)
    q_modes = serializers.IntegerField(default=16, min_value=1)
    value_tolerance = serializers.FloatField(
        default=1e-4, validators=[positive]
    )


class PenaltySerializer(serializers.Serializer):
    epsilon = serializers.FloatField(default=0.05, validators=[positive])
    delta = serializers.FloatField(default=0.05, validators=[positive])


class SweepSerializer(serializers.Serializer):
    epsilons = serializers.ListField(
        child=serializers.FloatField(validators=[positive]),
        min_length=1,
        default=lambda: [0.2, 0.1, 0.05, 0.02, 0.01],
        validators=[decreasing],
    )
    deltas = serializers.ListField(
        child=serializers.FloatField(validators=[positive]),
        required=False,
        validators=[decreasing],
    )
    pairing = serializers.ChoiceField(choices=PAIRINGS, default='zip')
    ctol = serializers.FloatField(default=1e-2, validators=[positive])

    def validate(self, attrs):
        attrs.setdefault('deltas', list(attrs['epsilons']))
        unequal = len(attrs['deltas']) != len(attrs['epsilons'])
        if attrs['pairing'] == 'zip' and unequal:
            raise serializers.ValidationError({
                'deltas': 'При попарной развертке списки eps и delta '
                          'должны быть одной длины.'
            })
        return attrs


class ParticlesSerializer(serializers.Serializer):
    count = serializers.IntegerField(default=20000, min_value=100)
    seeds = serializers.IntegerField(default=10, min_value=1)
    gain = serializers.FloatField(default=0.0, min_value=0.0)
    drift_speeds = serializers.ListField(
        child=serializers.FloatField(), default=lambda: [0.0, 1.0]
    )
    envelope_sampling = serializers.FloatField(
        default=3.0, validators=[positive]
    )
    envelope_grid = serializers.FloatField(default=2.0, validators=[positive])
    ito_tolerance = serializers.FloatField(default=5e-3, validators=[positive])


class ExperimentSerializer(serializers.Serializer):
    """Полная конфигурация эксперимента.

    После проверки полей строится задача и прогоняются валидаторы
    предположений: гамильтониан и ограничение.
    """
    name = serializers.CharField(max_length=100)
    seed = serializers.IntegerField(default=0, min_value=0)
    grid = GridSerializer()
    hamiltonian = HamiltonianSerializer()
    constraint = ConstraintSerializer()
    running_cost = FunctionalSerializer(required=False)
    terminal_cost = FunctionalSerializer(required=False)
    initial = InitialSerializer()
    solver = SolverSerializer(required=False)
    penalty = PenaltySerializer(required=False)
    sweep = SweepSerializer(required=False)
    particles = ParticlesSerializer(required=False)

    def validate(self, attrs):
        for section, serializer_class in (
            ('solver', SolverSerializer),
            ('penalty', PenaltySerializer),
            ('sweep', SweepSerializer),
            ('particles', ParticlesSerializer),
        ):
            if section not in attrs:
                defaults = serializer_class(data={})
                defaults.is_valid(raise_exception=True)
                attrs[section] = defaults.validated_data
        try:
            problem = catalog.build_problem(attrs)
        except ValueError as error:
            raise serializers.ValidationError(str(error)) from error
        hamiltonian_validator(
            problem.hamiltonian,
            problem.space,
            attrs['hamiltonian']['momentum_box'],
        )
        constraint_validator(problem.constraint, problem.initial)
        return attrs


class CostReportSerializer(serializers.Serializer):
    kinetic = serializers.FloatField()
    running = serializers.FloatField()
    terminal = serializers.FloatField()
    running_penalty = serializers.FloatField()
    terminal_penalty = serializers.FloatField()
    total = serializers.FloatField()
    penalized = serializers.FloatField()


class RoundRecordSerializer(serializers.Serializer):
    round = serializers.IntegerField()
    gap = serializers.FloatField()
    response_gap = serializers.FloatField()
    multiplier_change = serializers.FloatField()
    exclusion = serializers.FloatField()
    penalized_cost = serializers.FloatField()
    max_psi = serializers.FloatField()


class CertificateSerializer(serializers.Serializer):
    bound = serializers.FloatField()
    observed = serializers.FloatField()
    passed = serializers.BooleanField()


class ValueReportSerializer(serializers.Serializer):
    lhs = serializers.FloatField()
    rhs = serializers.FloatField()
    gap = serializers.FloatField()


class TransversalitySerializer(serializers.Serializer):
    checked = serializers.IntegerField()
    min_value = serializers.FloatField(allow_null=True)
    passed = serializers.BooleanField()


class SweepPointSerializer(serializers.Serializer):
    epsilon = serializers.FloatField()
    delta = serializers.FloatField()
    converged = serializers.BooleanField()
    rounds = serializers.IntegerField()
    max_psi = serializers.FloatField()
    terminal_psi = serializers.FloatField()
    cost = serializers.FloatField()
    penalized_cost = serializers.FloatField()
    multiplier_l1 = serializers.FloatField()
    lip_t = serializers.FloatField()
    lip_x = serializers.FloatField()
    complementarity = serializers.FloatField()
    exclusion = serializers.FloatField()
    value_gap = serializers.FloatField()
    leading_max = serializers.FloatField()
    remainder_max = serializers.FloatField()
    certificate_passed = serializers.BooleanField()
    error = serializers.CharField(allow_null=True)


class SweepReportSerializer(serializers.Serializer):
    ctol = serializers.FloatField()
    threshold = serializers.ListField(
        child=serializers.FloatField(), allow_null=True
    )
    cost_spread = serializers.FloatField()
    multiplier_spread = serializers.FloatField()
    multiplier_slope = serializers.FloatField()
    leading_slope = serializers.FloatField()
    lipschitz_ratio = serializers.FloatField()
    points = SweepPointSerializer(many=True)


class CheckResultSerializer(serializers.Serializer):
    name = serializers.CharField()
    passed = serializers.BooleanField(allow_null=True)
    value = serializers.FloatField(allow_null=True)
    limit = serializers.FloatField(allow_null=True)
    detail = serializers.CharField(allow_blank=True)
