"""Exception hierarchy shared by all gsc modules.

The CLI maps these onto exit codes: :class:`InputError` exits 2, every
other :class:`GscError` exits 3.
"""


class GscError(Exception):
    """Base class for all errors raised by gsc."""


class InputError(GscError, ValueError):
    """Malformed or inconsistent input data (files, coordinates, names)."""


class ParameterError(GscError, ValueError):
    """Invalid or infeasible parameter values."""


class FeasibilityError(ParameterError):
    """Parameters that are structurally valid but impossible for the data,
    e.g. a block that does not fit inside a segment."""


class DegenerateDenominatorError(GscError, ZeroDivisionError):
    """A ratio statistic was requested on a window where its denominator
    vanishes (no feature-A bases, or no feature-A instances)."""
