"""Exception hierarchy shared across the package."""


class IpkpqError(Exception):
    """Base class for all package errors."""


class ParameterError(IpkpqError, ValueError):
    """Invalid argument: wrong length, bad dimensions, out-of-range value."""


class DecodeError(IpkpqError, ValueError):
    """Malformed encoded object (keys, signatures, files, TLV records)."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (at byte offset {offset})")
        self.offset = offset


class StateError(IpkpqError, RuntimeError):
    """Operation invoked in the wrong lifecycle phase or order."""


class ConflictError(IpkpqError, RuntimeError):
    """Uniqueness violation, e.g. a duplicate active registration."""


class AuthorizationError(IpkpqError, RuntimeError):
    """Resource-containment violation at issuance time."""


class TransportError(IpkpqError, RuntimeError):
    """Online query transport failure, distinct from a negative lookup verdict."""
