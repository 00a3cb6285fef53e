"""Exception hierarchy shared by every layer of the package."""


class GrussError(Exception):
    """Base class for all errors raised by :mod:`gruss`."""


class ShapeMismatch(GrussError, ValueError):
    pass


class NonFiniteInput(GrussError, ValueError):
    pass


class NotHermitian(GrussError, ValueError):
    pass


class NotPositive(GrussError, ValueError):
    pass


class NotUnit(GrussError, ValueError):
    pass


class RadiusViolated(GrussError, ValueError):
    """A ball condition ``||x_i - a|| <= r`` fails for some index."""

    def __init__(self, message, *, index=None, distance=None, radius=None):
        super().__init__(message)
        self.index = index
        self.distance = distance
        self.radius = radius


class Singular(GrussError, ValueError):
    """``sin(omega * m)`` vanishes, so the closed-form phase sum is undefined."""


class BadIndex(GrussError, IndexError):
    pass


class CapExceeded(GrussError, ValueError):
    pass


class UnknownInequality(GrussError, KeyError):
    pass


class InstanceIOError(GrussError, OSError):
    pass


class ReportIOError(GrussError, OSError):
    pass


class ParseError(GrussError, ValueError):
    def __init__(self, message, line=0, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class VersionMismatch(GrussError, ValueError):
    pass
