"""Exception hierarchy shared by all modules."""


class VQFError(Exception):
    """Base class for all package errors."""


class InfeasibleInstance(VQFError):
    """The instance cannot be encoded or has no solution under the chosen conventions."""


class EvenInput(InfeasibleInstance, ValueError):
    pass


class TooSmall(InfeasibleInstance, ValueError):
    pass


class InvalidPrior(InfeasibleInstance, ValueError):
    pass


class Infeasible(InfeasibleInstance):
    """A clause system was found to be contradictory during preprocessing."""


class NotBiprime(InfeasibleInstance, ValueError):
    pass


class NonBinarySubstitution(VQFError, ValueError):
    """A ledger expression evaluated outside {0, 1}."""


class AlreadySolved(VQFError):
    """Preprocessing fixed every variable; carries the decoded factors."""

    def __init__(self, factors):
        self.factors = factors
        super().__init__(f"instance solved by preprocessing: factors {factors}")


class LengthMismatch(VQFError, ValueError):
    pass


class SizeMismatch(VQFError, ValueError):
    pass


class TooManyQubits(VQFError, ValueError):
    pass


class BadShape(VQFError, ValueError):
    pass


class WrongKind(VQFError, ValueError):
    pass


class NonFiniteValue(VQFError, FloatingPointError):
    pass


class Empty(VQFError, ValueError):
    pass


class DegenerateFit(VQFError, ValueError):
    pass


class ConfigError(VQFError, ValueError):
    """Malformed experiment configuration."""
