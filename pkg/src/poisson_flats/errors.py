"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class FrameError(ValueError):
    """A direction frame is not orthonormal (or not orthogonal where required)."""


class DimensionMismatchError(ValueError):
    """Flats with different spaces or dimensions were combined."""


class ResourceError(RuntimeError):
    """A simulation would exceed a configured size cap."""


class ConfigError(ValueError):
    """A study configuration is invalid."""
