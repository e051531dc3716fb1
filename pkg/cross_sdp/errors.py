"""
Exception hierarchy for certificate construction, exact linear algebra and the oracle
"""


class CrossSdpError(Exception):
    """Base class for every error raised by cross_sdp."""


class PreconditionError(CrossSdpError, ValueError):
    """Parameters fall outside the domain of an operation."""


class DegenerateDenominatorError(PreconditionError):
    """The λ₁ denominator n − 2k + 1 is not positive."""


class CapExceededError(PreconditionError):
    """A materialization or exhaustive-search cap would be exceeded."""


class DimensionMismatchError(CrossSdpError, ValueError):
    pass


class RadicandMismatchError(CrossSdpError, ValueError):
    pass


class RationalFormatError(CrossSdpError, ValueError):
    pass


class InfeasibleWindowError(CrossSdpError, RuntimeError):
    """An ε₁ window that the construction guarantees to be nonempty came out empty."""
