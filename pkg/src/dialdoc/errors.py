"""Error taxonomy shared by all pipeline stages.

Exit-code convention: 0 success, 1 validation findings, 2 usage error,
3 I/O or contract violation.
"""


class HarnessError(Exception):
    """Base class; `exit_code` is what the CLI returns when this escapes."""

    exit_code = 3


class UsageError(HarnessError):
    """Bad invocation: unknown flavor, malformed flag value, and the like."""

    exit_code = 2


class ParseError(HarnessError):
    """Malformed source record. Message names file, record index, and field."""

    def __init__(self, message, *, file=None, record=None, field=None):
        parts = [message]
        if file is not None:
            parts.append(f"file={file}")
        if record is not None:
            parts.append(f"record={record}")
        if field is not None:
            parts.append(f"field={field}")
        super().__init__(" ".join(str(p) for p in parts))
        self.file = file
        self.record = record
        self.field = field


class ReferentialIntegrityError(HarnessError):
    """A record references an id that does not resolve."""

    def __init__(self, message, *, missing_id=None):
        super().__init__(message)
        self.missing_id = missing_id


class OffsetMismatchError(HarnessError):
    """Answer text not found at the stated character offsets."""

    def __init__(self, message, *, example_id=None):
        super().__init__(message)
        self.example_id = example_id


class ContractViolation(HarnessError):
    """An operation precondition or invariant was violated by the caller."""


class ConfigurationError(HarnessError):
    """Settings that cannot produce a valid result (e.g. zero window capacity)."""
