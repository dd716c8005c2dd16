"""Exception hierarchy. Each class maps to one CLI exit code."""


class QAnomalyError(Exception):
    exit_code = 1


class DomainError(QAnomalyError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigError(QAnomalyError, ValueError):
    exit_code = 2


class ConvergenceError(QAnomalyError, ArithmeticError):
    """Series evaluated outside its validated radius."""

    exit_code = 3


class QuadratureError(QAnomalyError, ArithmeticError):
    exit_code = 3

    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class IntegratorError(QAnomalyError, ArithmeticError):
    exit_code = 4

    def __init__(self, message, t_fail=float("nan")):
        super().__init__(f"{message} at t = {t_fail!r}")
        self.t_fail = t_fail


class GridSupportError(QAnomalyError, ValueError):
    """Test function does not vanish on the excluded boundary band."""

    exit_code = 5
