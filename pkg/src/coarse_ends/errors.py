"""Exception hierarchy shared by every module."""


class CoarseError(Exception):
    """Base class for all errors raised by coarse_ends."""


class InstanceError(CoarseError, ValueError):
    """Malformed input data for a finite instance or ladder."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MapError(CoarseError):
    """A map sample violates the hypotheses needed to induce a map on ends."""


class CertificateError(CoarseError, ValueError):
    """A certificate or symbolic space descriptor is malformed."""


class InconsistentCertificates(CoarseError):
    """A pair of points is certified both connected and separated."""


class ReportExistsError(CoarseError, FileExistsError):
    """Refusing to overwrite an existing report file."""
