"""Exception types, mapped onto CLI exit codes by :mod:`kdsos.cli`."""


class ValidationError(ValueError):
    """Malformed input: bad shapes, labels out of range, broken files, invalid configs."""


class NumericalError(RuntimeError):
    """Numerical failure, e.g. an eigensolver that exceeded its iteration cap."""
