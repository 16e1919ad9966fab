"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
BackendError -> 3.
"""

from __future__ import annotations


class PassageLabError(Exception):
    """Base class for every error raised by this package."""


class UsageError(PassageLabError):
    """Bad invocation: unknown command, missing argument, conflicting flags."""


class DataError(PassageLabError):
    """Invalid or inconsistent data supplied to the pipeline."""


class BackendError(PassageLabError):
    """A text-generation backend failed or could not be reached."""


# --- data errors -----------------------------------------------------------


class CatalogSchemaError(DataError):
    """Catalog file violates the schema; names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{message} (field: {field})")
        self.field = field


class DanglingReferenceError(DataError):
    """An identifier points at something that does not exist."""

    def __init__(self, message: str, missing_id: str):
        super().__init__(f"{message}: {missing_id!r}")
        self.missing_id = missing_id


class GradeRangeError(DataError):
    """A grade fell outside the supported band of 1-5."""

    def __init__(self, message: str, grade: object = None):
        super().__init__(message)
        self.grade = grade


class TemplateError(DataError):
    """A prompt template could not be loaded or rendered."""


class MalformedResponseError(DataError):
    """A backend response could not be parsed; the raw text is retained."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class MalformedVerdictError(MalformedResponseError):
    """A judge response did not contain a valid verdict."""


class CassetteError(DataError):
    """A cassette file is corrupt or violates its invariants."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"{message} (line {line_number})"
        super().__init__(message)
        self.line_number = line_number


class CorpusError(DataError):
    """A reference-corpus file is invalid; names the offending entry."""


class MissingInputError(DataError):
    """A pipeline stage needs an input that has not been produced yet."""


# --- backend errors --------------------------------------------------------


class TransportError(BackendError):
    """Request failed after exhausting the retry budget."""

    def __init__(self, message: str, fingerprint: str | None = None):
        if fingerprint:
            message = f"{message} (fingerprint {fingerprint})"
        super().__init__(message)
        self.fingerprint = fingerprint


class AuthError(BackendError):
    """Credentials missing or rejected."""


class ReplayMissError(BackendError):
    """Fingerprint absent from the replay cassette."""

    def __init__(self, fingerprint: str):
        super().__init__(f"no recorded response for fingerprint {fingerprint}")
        self.fingerprint = fingerprint


class NoMatchingRuleError(BackendError):
    """A scripted mock backend had no rule for the request."""
