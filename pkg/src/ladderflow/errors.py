"""Exception types shared across ladderflow."""


class LadderflowError(Exception):
    """Base class for all ladderflow errors."""


class InputError(LadderflowError, ValueError):
    """Invalid argument: bad labels, shapes, angles or configuration."""


class NumericalFailure(LadderflowError, ArithmeticError):
    """A numerical routine produced a result outside its tolerance window."""


class CapabilityError(LadderflowError):
    """The request exceeds what the implementation supports (e.g. register size)."""


class ZeroProbabilityBranch(LadderflowError):
    """A projective measurement outcome has (numerically) zero probability."""

    def __init__(self, probability: float, message: str = ""):
        self.probability = probability
        super().__init__(message or f"zero-probability branch (p={probability:.3e})")
