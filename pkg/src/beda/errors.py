"""Exception hierarchy shared across the package."""


class BedaError(Exception):
    """Base class for all package errors."""


class DomainError(BedaError):
    """An argument violates a documented precondition."""


class CapacityError(BedaError):
    """Input exceeds an enumeration or size guard."""


class TemplateError(BedaError):
    """A prompt template slot is missing or unknown."""


class ProtocolError(BedaError):
    """A remote service answered with a malformed payload."""


class TransportError(BedaError):
    """A remote call failed after exhausting retries."""


class DataError(BedaError):
    """A data file or training record is malformed or incomplete."""
