"""Exception hierarchy shared by the library and the CLI."""


class KronMimoError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class ProfileError(KronMimoError, ValueError):
    exit_code = 2


class RejectNegativeEntry(ProfileError):
    pass


class RejectZeroTrace(ProfileError):
    pass


class UnknownKind(ProfileError):
    pass


class InvalidParams(ProfileError):
    pass


class NumericalError(KronMimoError, ArithmeticError):
    exit_code = 3


class NoConvergence(NumericalError):
    def __init__(self, message, iterations=None, index=None):
        super().__init__(message)
        self.iterations = iterations
        self.index = index


class NumericalFailure(NumericalError):
    def __init__(self, message, trial=None):
        super().__init__(message)
        self.trial = trial


class InsufficientSamples(KronMimoError, ValueError):
    exit_code = 3
