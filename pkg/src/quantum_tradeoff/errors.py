"""Exception types raised by the package."""


class InvalidDimensionError(ValueError):
    """Hilbert-space dimension is out of range or inconsistent."""


class NotHermitianError(ValueError):
    """Matrix is not square or not Hermitian within tolerance."""


class NotAStateError(ValueError):
    """Matrix is not a valid density matrix."""


class InvalidPovmError(ValueError):
    """Effects are not PSD or do not sum to the identity."""


class BoundaryStateError(ArithmeticError):
    """An informative outcome has vanishing probability, so the Fisher matrix diverges."""


class RankDeficientStateError(ArithmeticError):
    """A quantum Fisher matrix was requested for a state that is not full rank."""

    def __init__(self, eigenvalue, threshold):
        self.eigenvalue = eigenvalue
        self.threshold = threshold
        super().__init__(
            f"state is rank deficient: eigenvalue {eigenvalue:.3e} <= {threshold:.1e}"
        )


class SearchFailedError(RuntimeError):
    """The optimal-measurement search did not converge within its budget."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoRootError(RuntimeError):
    """A bracketing root finder could not find a sign change."""


class ConfigError(ValueError):
    """Malformed experiment or CLI configuration."""
