"""Exception hierarchy shared across the package."""

from __future__ import annotations


class NegkbError(Exception):
    """Base class for all package errors."""


class IngestionError(NegkbError):
    """Raised when a source file is unusable (too many bad rows, bad header)."""

    def __init__(self, message: str, row_errors: list[str] | None = None):
        super().__init__(message)
        self.row_errors = row_errors or []


class EmptyKbError(NegkbError):
    """Frequency queries are undefined over an empty index."""


class UnknownConceptError(NegkbError):
    """Concept not present in the queried store."""


class ProviderError(NegkbError):
    """An inference provider (cache or remote) could not answer."""


class CacheMissError(ProviderError):
    """Strict cache lookup hit a pair or template that was never recorded."""


class RemoteProviderError(ProviderError):
    """Remote inference endpoint failed or returned garbage."""


class MalformedProbeError(NegkbError):
    """Probe template does not contain exactly one mask slot."""


class UndefinedScoreError(NegkbError):
    """Sibling-frequency scores are undefined for a zero sibling budget."""


class EvalInputError(NegkbError):
    """Evaluation inputs are inconsistent (missing concepts, empty truth)."""


class IncompatibleRunError(NegkbError):
    """Evaluation was pointed at outputs that do not match its inputs."""


class ConfigError(NegkbError):
    """Run configuration is out of range or internally inconsistent."""
