"""Exception hierarchy shared by all modules."""


class McNaughtonError(Exception):
    """Base class for every error raised by this package."""


class DegenerateSource(McNaughtonError):
    pass


class ZeroDimensional(McNaughtonError):
    pass


class OutOfSquare(McNaughtonError):
    pass


class InvalidMap(McNaughtonError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NotInjective(McNaughtonError):
    pass


class BudgetExceeded(McNaughtonError):
    pass


class ConstructionGateFailed(McNaughtonError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BadIndex(McNaughtonError):
    pass


class NotDenseSupport(McNaughtonError):
    pass


class ZeroRadius(McNaughtonError):
    pass


class SymbolicMismatch(McNaughtonError):
    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class Inconclusive(McNaughtonError):
    pass


class UndefinedAtPoint(McNaughtonError):
    pass


class NotMcNaughton(McNaughtonError):
    pass


class TermSyntaxError(McNaughtonError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position
