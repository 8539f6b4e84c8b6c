"""Exception hierarchy. The CLI maps input errors to exit code 2 and
numerical failures to exit code 3."""

from typing import Optional


class SwapChainError(Exception):
    """Base class for every error raised by swapchain"""


class InvalidInputError(SwapChainError, ValueError):
    """Bad label, range, dimension, partition, config or counts file"""


class UnknownPresetError(InvalidInputError, KeyError):
    def __init__(self, name: str, known: Optional[list] = None) -> None:
        self.name = name
        self.known = list(known or [])
        message = f"Unknown preset '{name}'"
        if self.known:
            message += f" (available: {', '.join(self.known)})"
        super().__init__(message)

    def __str__(self) -> str:
        return self.args[0]


class NumericalError(SwapChainError, ArithmeticError):
    """A numerical contract was violated (hermiticity, positivity, normalization)"""


class ImpossibleOutcomeError(NumericalError):
    """A measurement outcome with (numerically) zero probability was requested"""

    def __init__(self, message: str, probability: float) -> None:
        super().__init__(message)
        self.probability = probability


class ConvergenceError(NumericalError):
    """The likelihood maximization exhausted its iteration budget"""

    def __init__(self, iterations: int, gradient_norm: float) -> None:
        super().__init__(
            f"MLE did not converge after {iterations} iterations "
            f"(gradient max-norm {gradient_norm:.3e})"
        )
        self.iterations = iterations
        self.gradient_norm = gradient_norm
