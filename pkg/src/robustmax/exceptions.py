"""Exception types shared across the package."""


class RobustMaxError(Exception):
    """Base class for package errors."""


class InputError(RobustMaxError, ValueError):
    """Malformed arguments (dimension mismatch, bad bounds, ...)."""


class CapabilityError(RobustMaxError):
    """An operation was asked to work beyond its configured size cap."""


class EmptyPolytopeError(RobustMaxError):
    """Raised where a nonempty polytope is required; callers should prune."""


class LpNumericalError(RobustMaxError):
    """The simplex hit its pivot cap or produced an uncertifiable point."""


class InstanceFormatError(RobustMaxError, ValueError):
    """An instance file could not be parsed."""
