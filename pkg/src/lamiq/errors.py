"""Exception families, each mapped to a distinct CLI exit code."""


class LamiqError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(LamiqError):
    """Invalid user input: bad lattice spec, out-of-domain parameter, malformed flag value."""

    exit_code = 3


class ResourceError(LamiqError):
    """A configured budget was exhausted (orbit cap, LP draw budget, bisection depth)."""

    exit_code = 4


class InternalConsistencyError(LamiqError):
    """A correctness tripwire fired: the computation contradicts itself."""

    exit_code = 5


class IncompatibleRadicandError(InternalConsistencyError):
    """Sum of radical numbers over distinct radicands; signals wrong incidence or rank data."""


class GeometryInconsistencyError(InternalConsistencyError):
    """Moment recursion produced geometrically impossible data."""


class ClassificationError(InternalConsistencyError):
    """The face-type key merged faces whose computed scalars disagree."""
