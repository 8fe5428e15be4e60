"""Exception hierarchy shared across the toolkit.

Two branches matter for the CLI exit-code contract:
    ValidationError -> exit code 2 (bad inputs, shape/format violations)
    NumericError    -> exit code 1 (non-finite values, diverged training)
"""


class ArtinvError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ArtinvError):
    """Malformed or contract-violating input."""


class NumericError(ArtinvError):
    """Numerical failure (NaN/inf, divergence)."""


# --- geometry ---------------------------------------------------------------

class DegenerateCloud(ValidationError):
    """Point cloud has < 2 points or no x-extent; no upper hull exists."""


class EmptyInput(ValidationError):
    """An operation that needs at least one element received none."""


class ConstantChannel(ValidationError):
    """Per-speaker min == max on a channel; normalization is undefined."""


# --- features / formats -----------------------------------------------------

class ShapeMismatch(ValidationError):
    """Operand shapes are incompatible."""


class BadRate(ValidationError):
    """Frame rate must be positive."""


class UnknownPhoneme(ValidationError):
    """Label is not in the phoneme inventory."""


class BadMagic(ValidationError):
    """File does not start with the expected magic bytes/version."""


class Truncated(ValidationError):
    """File ended before the declared payload was complete."""


class NonFinite(NumericError):
    """A value that must be finite is NaN or infinite."""


class AlignmentError(ValidationError):
    """Base class for phoneme-alignment violations."""


class Overlap(AlignmentError):
    """Alignment intervals overlap."""


class Unsorted(AlignmentError):
    """Alignment intervals are not sorted by start time."""


class BadInterval(AlignmentError):
    """Interval has start >= end or non-finite bounds."""


class BadLabel(AlignmentError):
    """Alignment row is malformed or uses an out-of-inventory label."""


# --- models / training ------------------------------------------------------

class BadProbability(ValidationError):
    """Probability outside [0, 1)."""


class TooShort(ValidationError):
    """Sequence shorter than the discriminator receptive field."""


# --- evaluation -------------------------------------------------------------

class LengthMismatch(ValidationError):
    """Paired series have different lengths."""


class ZeroVariance(ValidationError):
    """Correlation is undefined for a constant series."""


class DimMismatch(ValidationError):
    """Paired matrices have different feature dimensions."""


class NoVowelFrames(ValidationError):
    """A requested vowel has no frames in the supplied data."""


class UnknownKind(ValidationError):
    """Unrecognized choice for an enumerated option."""
