class HardyCalcError(Exception):
    """Base class for errors raised by the numerical layer"""
    pass


class DomainError(HardyCalcError, ValueError):
    """Exception raised when a parameter or input lies outside the admissible range"""
    pass


class UndersampledError(DomainError):
    """Exception raised when a sampled multiplier cannot resolve a requested dilation"""
    pass


class UnsupportedError(HardyCalcError):
    """Exception raised when an operation is not available for the parameter regime"""
    pass


class NumericalError(HardyCalcError):
    """Exception raised when a quadrature fails to converge"""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
