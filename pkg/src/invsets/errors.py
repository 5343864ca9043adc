"""Error taxonomy shared across the package.

Exit-code mapping used by the CLI: usage errors exit 2 (argparse),
ValidationError exits 3, NumericError subclasses exit 4, anything
else exits 5.
"""


class InvsetsError(Exception):
    """Base class for all package errors."""


class ValidationError(InvsetsError):
    """Malformed input data, files, or configuration."""


class NumericError(InvsetsError):
    """Base class for numerical failures during fitting or resampling."""


class RankDeficientError(NumericError):
    """Design matrix is rank deficient; no silent pseudo-inverse fallback."""


class NotConvergedError(NumericError):
    """Iterative fit exhausted its iteration budget."""


class SeparationError(NumericError):
    """Logistic fit diverged; data are (quasi-)separated."""


class DegenerateSEError(NumericError):
    """A standard error of exactly zero where a positive one is required."""


class BootstrapDegenerateError(NumericError):
    """Too many consecutive failed resamples for one bootstrap draw."""


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5
