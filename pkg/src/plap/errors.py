"""Exception types raised across the package."""


class PlapError(Exception):
    """Base class for package errors."""


class DomainError(PlapError, ValueError):
    pass


class SamplingError(PlapError, RuntimeError):
    pass


class KernelError(PlapError, ValueError):
    pass


class QuadratureError(PlapError, RuntimeError):
    pass


class DisconnectedError(PlapError, RuntimeError):
    """The stencil or graph has more than one connected component."""


class DegenerateError(PlapError, ValueError):
    """An operator is undefined at the requested point (no neighbors, zero gradient...)."""
