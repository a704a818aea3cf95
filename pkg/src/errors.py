"""
Винятки розв'язувача. Кожен клас знає свій код виходу CLI:
0 успіх, 1 використання/конфіг, 2 порушення гіпотези, 3 відсутність збіжності.
"""


class NehariError(Exception):
    exit_code = 1


class ConfigError(NehariError, ValueError):
    """Помилка конфігурації (торус, потенціал, JSON-файл запуску)."""


class DomainError(NehariError, ValueError):
    """Точка поза допустимою множиною: u ∈ E⁻, w ∉ S⁺, різні торуси."""


class HypothesisViolation(NehariError):
    """Порушено гіпотезу задачі (щілина, умови на f). `report` — звіт, що це показав."""
    exit_code = 2

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(NehariError, RuntimeError):
    exit_code = 3


class NonconvergenceError(NumericalError):
    """Вичерпано ліміт ітерацій. `best` — найкраща знайдена ітерація."""

    def __init__(self, message: str, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace or []


class InnerMaximizationError(NumericalError):
    pass


class UniquenessAuditError(InnerMaximizationError):
    """Різні старти внутрішньої максимізації дали різні точки."""

    def __init__(self, message: str, candidates=None):
        super().__init__(message)
        self.candidates = candidates or []


class StagnationError(NumericalError):
    """Крок потоку зменшився до нуля. `last` — остання точка траєкторії."""

    def __init__(self, message: str, last=None):
        super().__init__(message)
        self.last = last
