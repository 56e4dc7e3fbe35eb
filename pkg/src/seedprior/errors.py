"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: ValidationError -> 2,
FormatError (an OSError) and other I/O failures -> 3.
"""


class ValidationError(ValueError):
    """Invalid data: bad seeds, shape mismatches, infeasible specs."""


class FormatError(OSError):
    """Unreadable or unsupported file content (corrupt/truncated/unknown format)."""
