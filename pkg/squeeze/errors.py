"""
Exceptions raised by the library. Each carries the process exit code the CLI
reports for it, the same way a handler maps a failure to a status code.
"""

EXIT_OK = 0
EXIT_ARGUMENT = 2
EXIT_DISAGREEMENT = 3
EXIT_NON_CONVERGENCE = 4


class SqueezeError(Exception):
    exit_code = EXIT_ARGUMENT

    def __init__(self, detail: str, exit_code: int = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class ArgumentError(SqueezeError):
    exit_code = EXIT_ARGUMENT


class DomainError(SqueezeError):
    """Argument outside the domain of a function."""
    exit_code = EXIT_ARGUMENT


class NonTerminatingSeriesError(DomainError):
    pass


class DisagreementError(SqueezeError):
    """Two independent evaluations differ by more than the tolerance."""
    exit_code = EXIT_DISAGREEMENT


class NonConvergenceError(SqueezeError):
    exit_code = EXIT_NON_CONVERGENCE


class CutoffExceededError(NonConvergenceError):
    pass


class OverflowRangeError(SqueezeError):
    exit_code = EXIT_NON_CONVERGENCE
