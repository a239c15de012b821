"""Exception hierarchy for the toolkit.

Three broad families map onto the CLI exit codes: configuration problems
(exit 2), data problems (exit 3) and numerical failures (exit 4). Review
errors are surfaced as HTTP statuses by the service, never as exit codes.
"""


class StainbenchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(StainbenchError):
    """Invalid or inconsistent configuration."""


class NoRuns(ConfigError):
    """Checkpoint selection invoked with an empty run list."""


class MetricUnavailable(ConfigError):
    """A requested metric cannot be computed (missing embedding provider)."""


class DataError(StainbenchError):
    """Invalid input data."""


class OutOfRange(DataError):
    """Image intensity outside [0, 1] or non-finite."""


class BadShape(DataError):
    """Tensor shape violates the container invariants."""


class ShapeMismatch(DataError):
    """Two operands that must share a shape do not."""


class TooSmall(DataError):
    """Image too small for the requested window/pyramid configuration."""


class TooFewSamples(DataError):
    """Not enough samples for a distribution-level estimate."""


class DimensionMismatch(DataError):
    """Embedding dimensionalities of the two sides differ."""


class BadMagic(DataError):
    """Embedding file does not start with the expected magic bytes."""


class IoError(DataError):
    """File missing, unreadable, or truncated."""


class UnsupportedFormat(DataError):
    """Image file format/mode outside the supported set."""


class EmptyIntersection(DataError):
    """Directory pairing produced no common filename stems."""


class InsufficientClass(DataError):
    """A HER2 score class is too small for the requested stratified sample."""


class NumericError(StainbenchError):
    """Numerical failure inside a metric kernel."""


class NotSymmetric(NumericError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class NumericalFailure(NumericError):
    """Eigensolver non-convergence or equivalent breakdown."""


class ReviewError(StainbenchError):
    """Base class for review-session errors."""


class DuplicateAnswer(ReviewError):
    """An (item, rater) pair was answered twice."""


class UnknownItem(ReviewError):
    """Answer refers to an item outside the rater's session."""


class SessionClosed(ReviewError):
    """The session no longer accepts answers."""


class InsufficientRaters(ReviewError):
    """Fewer than two raters answered a scored item."""


class NoDuplicates(ReviewError):
    """Duplicate-consistency requested on a session without duplicates."""
