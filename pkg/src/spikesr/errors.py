"""Exception types distinguishing numerical failures from bad input."""

__all__ = [
    "NumericalError",
    "SolverError",
    "CertificateError",
    "PartitionError",
    "InfeasibleSupportError",
    "OracleInfeasibleError",
]


class NumericalError(RuntimeError):
    """A computation failed numerically although the input was valid."""


class SolverError(NumericalError):
    """The first-order solver hit non-finite values or diverged."""


class CertificateError(NumericalError):
    """A certificate could not be constructed or failed verification."""


class PartitionError(NumericalError):
    """No admissible separated partition of a support could be found."""


class InfeasibleSupportError(NumericalError):
    """Random support sampling failed (density too high for the class)."""


class OracleInfeasibleError(NumericalError):
    """Exhaustive search found no candidate within the residual budget."""
