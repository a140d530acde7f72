"""Exception hierarchy shared by the solvers."""


class KAdaptError(Exception):
    "Base class for every error raised by the solver suite."
    pass


class ArgumentError(KAdaptError, ValueError):
    "Raised when an argument lies outside the documented domain."
    pass


class InfeasibleError(KAdaptError):
    "Raised when a ground set (or a model built on it) has no feasible solution."
    pass


class SizeLimitError(KAdaptError):
    "Raised when an enumeration exceeds its output cap."

    def __init__(self, message, produced=None):
        super().__init__(message)
        self.produced = produced


class UnsupportedError(KAdaptError):
    "Raised when an algorithm is asked for a configuration it does not handle."
    pass


class SolverError(KAdaptError):
    "Raised when the LP or MIP core ends in an unexpected status."

    def __init__(self, message, status=None):
        super().__init__(message if status is None else f"{message} (status: {status})")
        self.status = status


class InvariantError(KAdaptError, AssertionError):
    "Raised when an internal invariant is violated beyond tolerance."
    pass


class GenerationError(KAdaptError):
    "Raised when the instance generator cannot produce a connected instance."
    pass
