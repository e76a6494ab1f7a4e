"""Exception hierarchy shared by every module."""


class BisectionError(Exception):
    """Base class for errors raised by this package."""


class UsageError(BisectionError, ValueError):
    """Bad arguments: dimension mismatch, out-of-range parameters."""


class DegenerateInputError(BisectionError, ValueError):
    """Input that is well-formed but numerically degenerate (zero vector, rank deficiency)."""


class ProtocolError(BisectionError):
    """Violation of the query protocol, e.g. an invalid query vector."""


class OneShotViolation(ProtocolError):
    """A query ticket was used to reach the oracle more than once."""


class InvariantViolation(BisectionError, AssertionError):
    """An internal invariant no longer holds. Always a bug."""


class ConfigError(BisectionError, ValueError):
    """Unparseable or invalid experiment configuration."""

    def __init__(self, message, *, line=None, key=None):
        self.line = line
        self.key = key
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"key {key!r}")
        super().__init__(f"{', '.join(prefix)}: {message}" if prefix else message)
