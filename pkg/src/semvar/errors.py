"""Exception types shared across the package."""


class SemvarError(Exception):
    """Base error for corpus, provider, format, and pipeline failures."""


class FormatError(SemvarError):
    """A persisted artifact (SEMV1 container, document file, CSV) is malformed."""


class ProviderError(SemvarError):
    """An embedding provider is unreachable or returned an invalid response."""
