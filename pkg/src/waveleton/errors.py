"""Exception hierarchy shared by all modules."""


class WaveletonError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedOrderError(WaveletonError, ValueError):
    pass


class ShapeError(WaveletonError, ValueError):
    pass


class ModeError(WaveletonError, ValueError):
    pass


class UndefinedEntropyError(WaveletonError, ValueError):
    pass


class RegularityError(WaveletonError, ValueError):
    pass


class AliasingError(WaveletonError, ValueError):
    pass


class EmptyStateError(WaveletonError, ValueError):
    pass


class LevelError(WaveletonError, ValueError):
    pass


class NestingError(WaveletonError, ValueError):
    pass


class BasisError(WaveletonError, ValueError):
    pass


class RankError(WaveletonError, ArithmeticError):
    """Singular Galerkin system; ``deficient`` lists the offending unknowns."""

    def __init__(self, message, deficient=()):
        super().__init__(message)
        self.deficient = tuple(deficient)


class DivergenceError(WaveletonError, ArithmeticError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, step, message=None):
        super().__init__(message or f"non-finite field at step {step}")
        self.step = step


class CFLError(WaveletonError, ValueError):
    """Time step exceeds the stability bound; ``field`` names the config entry."""

    def __init__(self, message, field="dynamics.dt"):
        super().__init__(message)
        self.field = field
