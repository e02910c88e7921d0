"""Exception hierarchy shared by every module of the package."""


class ImplicitKitError(Exception):
    """Base class for all errors raised by implicit_kit."""


class ParseError(ImplicitKitError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UndeclaredVariable(ParseError):
    pass


class DomainError(ImplicitKitError):
    """Evaluation left the domain of an operation (log of a nonpositive number, ...)."""

    def __init__(self, message, subexpr=None):
        if subexpr is not None:
            message = f"{message} in '{subexpr}'"
        super().__init__(message)
        self.subexpr = subexpr


class SingularMatrixError(ImplicitKitError):
    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class BaseResidualError(ImplicitKitError):
    """F does not vanish at the supplied base point."""


class DegenerateBase(ImplicitKitError):
    """The fiber derivative vanishes at the base point."""


class BracketFailure(ImplicitKitError):
    """Endpoint signs of a fiber do not straddle zero.

    ``level`` is filled in by the system engine with the index of the
    elimination level that failed.
    """

    def __init__(self, message, value=None, level=None):
        super().__init__(message)
        self.value = value
        self.level = level

    def __str__(self):
        msg = super().__str__()
        if self.level is not None:
            msg = f"level {self.level}: {msg}"
        return msg


class OutsideDomain(ImplicitKitError):
    pass


class DegenerateFiber(ImplicitKitError):
    pass


class SingularBase(ImplicitKitError):
    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class SingularFiber(ImplicitKitError):
    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class RadiusCollapse(ImplicitKitError):
    pass


class NoConvergence(ImplicitKitError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
