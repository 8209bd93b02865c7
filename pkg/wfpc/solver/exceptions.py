class SolverError(Exception):
    """Базовая ошибка численной части."""


class NumericalFailure(SolverError):
    """Срыв шага схемы: NaN/Inf, отрицательная плотность, утечка массы.

    Attributes:
        step: индекс временного шага, на котором обнаружена ошибка.
    """

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f'{message} (step {step})'
        super().__init__(message)


class LegendreConvergenceError(NumericalFailure):
    """Не найден максимум в преобразовании Лежандра."""


class NonContractionError(NumericalFailure):
    """Итерации Пикара перестали сжиматься."""

    def __init__(self, message, gaps):
        self.gaps = tuple(gaps)
        super().__init__(f'{message}; gaps={list(self.gaps)}')


class CrossingError(SolverError):
    """Вторая производная запрошена в нуле Ψ(m(t))."""
