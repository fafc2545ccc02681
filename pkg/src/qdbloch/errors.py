class QDBlochError(Exception):
    """Base class for all errors raised by qdbloch."""


class ShapeMismatch(QDBlochError, ValueError):
    pass


class NonHermitianInput(QDBlochError, ValueError):
    pass


class NonHermitianPotential(NonHermitianInput):
    pass


class NonRealShift(QDBlochError, ValueError):
    pass


class SymmetryViolation(QDBlochError, ValueError):
    pass


class ConvergenceFailure(QDBlochError, RuntimeError):
    pass


class CflViolation(QDBlochError, ValueError):
    pass


class NonFiniteField(QDBlochError, FloatingPointError):
    pass


class ConfigError(QDBlochError, ValueError):
    """Invalid scenario file, override or CLI argument."""
