"""Exception types shared across the package."""


class SingularKernelError(ValueError):
    """Raised when the dipole kernel is evaluated at (nearly) zero separation."""


class CloudParseError(ValueError):
    """Raised when a cloud file cannot be parsed; carries the offending line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class SizeLimitError(ValueError):
    """Raised when a problem size exceeds a guarded cost cap."""


class NumericalConsistencyError(ArithmeticError):
    """Raised when an internal cross-check (imaginary residue, dual-form identity,
    conserved quantity) fails beyond its tolerance."""
