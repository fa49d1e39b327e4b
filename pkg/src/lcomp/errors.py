"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`LCError`.
The three mid-level families map to distinct CLI exit codes.
"""


class LCError(Exception):
    """Base class for all package errors."""


# -- input / domain ----------------------------------------------------------

class InputError(LCError, ValueError):
    pass


class EmptyInput(InputError):
    pass


class UnsortedInput(InputError):
    pass


class DuplicateKey(UnsortedInput):
    pass


class TooShort(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class InvalidQuantile(InputError):
    pass


class ParseError(InputError):
    """Malformed corpus or text input."""


class DomainError(LCError):
    pass


class MissingCalibration(DomainError):
    pass


class DegenerateSample(DomainError):
    pass


class PrecisionError(DomainError):
    """No 32-bit segment parameters satisfy the error bound (key span too wide for epsilon)."""


# -- binary format -----------------------------------------------------------

class FormatError(LCError):
    pass


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class NonMonotoneSegments(FormatError):
    pass


class CorruptPayload(FormatError):
    pass


class SegmentStartOverflow(FormatError):
    pass


class MissingResiduals(FormatError):
    """Lossless decode requested on a segments-only (approximate) list."""
