"""Exception hierarchy shared by the library and the CLI."""


class FourWSError(Exception):
    """Base class for all package errors."""


class SingularityError(FourWSError):
    """Model evaluated at a singular configuration (cos(delta_f) ~ 0, 1 - kappa*e <= 0)."""


class GuardError(FourWSError):
    """Front steering angle outside the admissible set."""


class ProjectionError(FourWSError):
    """Closest point on the path is not unique or not defined."""


class PathRangeError(FourWSError):
    """Arclength outside a finite path."""


class PlacementError(FourWSError):
    """Requested double pole cannot be realized by the gain structure."""


class ConfigError(FourWSError):
    """Invalid scenario configuration."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
