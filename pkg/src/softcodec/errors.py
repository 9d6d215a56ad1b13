"""Exception hierarchy for softcodec.

The CLI maps these onto exit codes: usage problems exit with 2,
format and corruption problems exit with 3.
"""


class SoftCodecError(Exception):
    """Base class for every error raised by softcodec."""


class UsageError(SoftCodecError, ValueError):
    """Invalid parameters or mismatched inputs (depth, component count, ...)."""


class DomainError(SoftCodecError, ValueError):
    """A mathematical precondition does not hold."""


class BuildError(SoftCodecError, ValueError):
    """A code cannot be built from the given frequencies."""


class FormatError(SoftCodecError):
    """Malformed container: bad magic, unsupported version, truncated header."""


class CorruptionError(FormatError):
    """A compressed frame cannot be turned back into a valid image."""


class DecodeError(CorruptionError):
    """A bitstream ran out of bits or held an invalid codeword."""


class IngestIOError(SoftCodecError, OSError):
    """A corpus file is unreadable or its payload is truncated."""


class EncodeError(SoftCodecError, ValueError):
    """A value cannot be expressed by the code in use."""
