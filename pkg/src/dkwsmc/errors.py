"""Exception hierarchy shared by the library and the command line front end."""

from __future__ import annotations


class DkwSmcError(Exception):
    """Base class for all errors raised by dkwsmc."""


class ParameterError(DkwSmcError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class BandError(DkwSmcError, ValueError):
    """A confidence band cannot be built from the given data."""


class ModelError(DkwSmcError, ValueError):
    """Malformed or invalid model description.

    ``location`` pinpoints the offending spot, either as ``line L, column C``
    for syntax errors or as a field path such as ``states[2].transitions[0]``.
    """

    def __init__(self, message: str, location: str | None = None):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class QueryError(DkwSmcError, ValueError):
    """Malformed query string. ``column`` is 1-based."""

    def __init__(self, message: str, column: int | None = None):
        self.message = message
        self.column = column
        super().__init__(f"column {column}: {message}" if column else message)


class NonTermination(DkwSmcError, RuntimeError):
    """A simulated path did not reach its stopping condition."""

    def __init__(self, message: str, trace: int | None = None, steps: int | None = None):
        self.trace = trace
        self.steps = steps
        where = f"trace {trace}: " if trace is not None else ""
        super().__init__(where + message)


class StreamExhausted(DkwSmcError, RuntimeError):
    """The sample source ran dry before a sequential stage completed.

    ``last`` holds the most recent completed stage result (or ``None`` if
    not even the first stage could be completed).
    """

    def __init__(self, message: str, last=None):
        self.last = last
        super().__init__(message)
