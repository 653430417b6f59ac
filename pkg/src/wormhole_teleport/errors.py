"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError`, resource guards from
:class:`ResourceError`; the CLI maps them to distinct exit codes.
"""


class WormholeError(Exception):
    pass


class DomainError(WormholeError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalError(WormholeError):
    pass


class StepSizeError(NumericalError):
    pass


class NonFiniteError(NumericalError):
    pass


class OutOfRangeError(WormholeError, IndexError):
    pass


class BracketError(NumericalError):
    pass


class NoRootError(NumericalError):
    pass


class DegeneracyError(NumericalError):
    pass


class TrotterError(NumericalError):
    pass


class ResourceError(WormholeError):
    """Requested problem exceeds a hard size cap."""


class BasisOverflowError(ResourceError):
    pass
