"""Exception types shared by the solver, the training loop and the CLI"""

from typing import Optional


class HermiteNNError(Exception):
    """Base class for every error raised by this package"""


class ConfigError(HermiteNNError, ValueError):
    """Invalid configuration, shape mismatch or out-of-domain request.

    Maps to exit code 1 in the CLI.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalFailure(HermiteNNError, ArithmeticError):
    """A computation produced non-finite values or an ill-conditioned system.

    Maps to exit code 2 in the CLI.
    """

    def __init__(
        self,
        message: str,
        iteration: Optional[int] = None,
        degree: Optional[int] = None,
        condition: Optional[float] = None,
    ):
        self.iteration = iteration
        self.degree = degree
        self.condition = condition
        super().__init__(message)
