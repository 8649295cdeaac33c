"""Exception hierarchy shared by every qres module."""


class QresError(Exception):
    """Base class for all errors raised by qres."""


class ValidationError(QresError, ValueError):
    """Input failed a structural or physical validity check."""


class DivergenceError(QresError, FloatingPointError):
    """Numerical integration produced non-finite values."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class IntegrationError(QresError, RuntimeError):
    """An integrator finished but its output violates a conserved quantity."""


class CapacityError(QresError, MemoryError):
    """Requested system size exceeds the configured memory budget."""


class CutoffError(QresError, RuntimeError):
    """Fock-space truncation leaks more population than allowed."""


class ProtocolError(QresError, RuntimeError):
    """An experimental protocol assumption is violated by the configuration."""


class SteadyStateError(QresError, RuntimeError):
    """Optomechanical steady-state equations could not be solved."""


class RankDeficiencyWarning(UserWarning):
    """Normal equations are singular and a minimum-norm solution was used."""
