"""Exception hierarchy shared by all stages."""


class NanofiberOrbitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NanofiberOrbitError, ValueError):
    """Argument outside the domain where a function is defined."""


class NoGuidedMode(NanofiberOrbitError):
    pass


class ConvergenceFailure(NanofiberOrbitError):
    pass


class NoWell(NanofiberOrbitError):
    """The effective potential has no trapping minimum outside the fiber."""


class MissingEntry(NanofiberOrbitError, KeyError):
    pass


class WindowOutsideTable(NanofiberOrbitError):
    pass


class GridMismatch(NanofiberOrbitError):
    pass


class InsufficientSampling(NanofiberOrbitError):
    pass


class ConfigError(NanofiberOrbitError):
    """Invalid configuration; ``key`` carries the dotted path of the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class StageDependencyError(NanofiberOrbitError):
    pass
