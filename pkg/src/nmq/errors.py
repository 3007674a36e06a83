"""Exception hierarchy shared by all nmq modules."""


class NMQError(Exception):
    """Base class for all errors raised by nmq."""


class NonHermitianInput(NMQError, ValueError):
    pass


class InvalidState(NMQError, ValueError):
    pass


class DimensionMismatch(NMQError, ValueError):
    pass


class DomainError(NMQError, ValueError):
    pass


class RangeError(NMQError, ValueError):
    pass


class ToleranceNotReached(NMQError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


class GridTooCoarse(NMQError, ArithmeticError):
    """Sign or monotonicity structure kept changing under grid refinement."""


class PoleProximity(NMQError, ArithmeticError):
    """A decay rate was requested too close to a zero of G(t)."""

    def __init__(self, t, magnitude):
        super().__init__(f"|G(t)| = {magnitude:.3e} at t = {t:.6g} is below the pole guard")
        self.t = t
        self.magnitude = magnitude


class BranchError(NMQError, ArithmeticError):
    """A decoherence factor or root branch produced an unphysical value."""


class NotAvailable(NMQError, NotImplementedError):
    pass


class GeneratorUnavailable(NMQError, NotImplementedError):
    pass


class ConfigError(NMQError, ValueError):
    pass


class NoCrossing(NMQError, ValueError):
    pass
