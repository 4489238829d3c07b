"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A degree or size limit of an exact algorithm was exceeded."""


class ProblemParseError(ValueError):
    """A problem definition file could not be parsed into an expansion."""


class UnsupportedError(ValueError):
    """The requested computation is outside the supported configuration."""


class ConsistencyError(RuntimeError):
    """An internal exact identity failed; indicates a bug, not bad input."""
