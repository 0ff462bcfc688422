"""
Module will define exceptions for the conceptsig module.
Every exception carries the exit code the command line reports for it,
so main.py can map failures to exit codes in a single place.
"""
from typing import Optional


class ConceptSigError(Exception):
    """
    Base exception for everything this package raises on purpose.
    The reason is given as the exception message
    """
    exit_code = 1


class MalformedInput(ConceptSigError):
    """
    Raised when an input file, field or argument can not be used.

    :param message: What is wrong with the input
    :type message: str
    :param source: File or field that holds the offending value, defaults to None
    :type source: Optional[str], optional
    """
    exit_code = 2

    def __init__(self, message: str, source: Optional[str] = None):
        if source:
            message = f"{source}: {message}"
        super().__init__(message)
        self.source = source


class DimensionMismatch(MalformedInput):
    """Point or cloud dimension disagrees with the basis or projection."""


class BasisTooLarge(MalformedInput):
    """
    The monomial basis would exceed the configured size cap.

    :param size: Number of monomials requested
    :type size: int
    :param cap: Configured cap
    :type cap: int
    """

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"basis too large: {size} monomials exceeds the cap of {cap}"
        )
        self.size = size
        self.cap = cap


class NumericFailure(ConceptSigError):
    """A numerical routine failed or did not converge."""
    exit_code = 3


class IntersectionNotConverged(NumericFailure):
    """
    Alternating projections did not reach the tolerance.

    :param residual: Frobenius change of the last iteration
    :type residual: float
    :param iterations: Iterations performed
    :type iterations: int
    """

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"intersection did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class CalibrationError(NumericFailure):
    """
    Recovery coefficients do not reproduce the Gaussian moment oracle.

    :param stage: "moment" or "moment_squared"
    :type stage: str
    :param residual: Largest relative residual on held-out test matrices
    :type residual: float
    """

    def __init__(self, stage: str, residual: float):
        super().__init__(
            f"calibration of stage '{stage}' failed, held-out residual {residual:.3e}"
        )
        self.stage = stage
        self.residual = residual


class NotSingleEquation(ConceptSigError):
    """Coefficient similarity needs a signature with exactly one null vector."""


class Uncalibrated(ConceptSigError):
    """A random network was used for recovery before calibrate() ran."""


class ExperimentFailed(SystemExit):
    """Can be raised by a repro experiment whose acceptance check fails."""
