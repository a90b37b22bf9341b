"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the operation's domain (singular matrix, bad symbol, ...)."""


class DegenerateError(DomainError):
    """A projective configuration is too degenerate to evaluate (three coincident points)."""


class CertificateError(RuntimeError):
    """A domination certificate is invalid or was used outside its guarantees."""


class ConvergenceError(RuntimeError):
    """An iteration failed to converge within its allowed number of steps."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BudgetError(RuntimeError):
    """An enumeration or search exceeded its configured budget."""


class PrecisionError(RuntimeError):
    """A finite-depth estimate is not accurate enough for the requested operation."""

    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class SchemeError(RuntimeError):
    """A contraction-scheme lookup failed (direction not covered by a robust cell)."""


class HypothesisError(RuntimeError):
    """Inputs violate the hypotheses of a lemma check (as opposed to its conclusion)."""
