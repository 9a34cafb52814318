"""Exception hierarchy shared by the library and the CLI.

``ValidationError`` maps to CLI exit code 2, ``NumericalError`` to 3.
"""


class VolkovSepError(Exception):
    """Base class for all package errors."""


class ValidationError(VolkovSepError, ValueError):
    """Input violates a documented precondition or invariant."""


class NumericalError(VolkovSepError, ArithmeticError):
    """A numerical procedure failed to meet its own convergence criterion."""


class TailError(NumericalError):
    """Mode-table truncation left a tail above tolerance."""

    def __init__(self, message, tail_norm):
        super().__init__(f"{message} (tail norm {tail_norm:.3e})")
        self.tail_norm = tail_norm


class NonContractionError(NumericalError):
    """Born iteration stopped contracting."""

    def __init__(self, ratio, iteration):
        super().__init__(
            f"Born iteration not contracting: residual ratio {ratio:.4g} at iteration {iteration}"
        )
        self.ratio = ratio
        self.iteration = iteration
