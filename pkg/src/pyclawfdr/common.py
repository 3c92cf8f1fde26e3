"""
Basic definitions and utilities.

Enumerations for the string-valued options of a run, the
NEG_INFINITY threshold sentinel, the exception hierarchy
and the tolerant comparisons shared by every thresholding
procedure.
"""

from typing import Any
import enum

import numpy

from pyclawfdr.configuration import config

inf = float("inf")  # type: float
"""A floating point constant set to ``float('inf')``."""

nan = float("nan")  # type: float
"""A floating point constant set to ``float('nan')``."""

NEG_INFINITY = -inf  # type: float
"""The threshold returned when no candidate satisfies the
FDP bound. Scores are never negative, so this value is
distinct from every attainable score and rejects nothing."""


@enum.unique
class Sidedness(str, enum.Enum):
    """How p-values are computed from a null CDF."""

    two_sided = "two_sided"
    """p = 2 min(F0(t), 1 - F0(t))"""
    left = "left"
    """p = F0(t)"""
    right = "right"
    """p = 1 - F0(t)"""


@enum.unique
class WeightKind(str, enum.Enum):
    """Strategies for building the locality weight
    matrix."""

    group = "group"
    """Indicator weights, w_ij = 1 if S_i = S_j."""
    gaussian = "gaussian"
    """Gaussian kernel of the covariate distance divided
    by a scale."""
    custom = "custom"
    """A user supplied callable mapping the covariates to
    an m x m array."""


@enum.unique
class DistanceNorm(str, enum.Enum):
    abs = "abs"
    euclidean = "euclidean"


@enum.unique
class EstimatorKind(str, enum.Enum):
    """Which density and proportion estimators feed the
    score function."""

    conformal = "conformal"
    """Estimators pooled over test and calibration
    statistics (swap-invariant)."""
    plain = "plain"
    """Estimators built from the test statistics only.
    Provided for comparison; the resulting scores are not
    swap-invariant and carry no FDR guarantee."""


@enum.unique
class CovariateKind(str, enum.Enum):
    categorical = "categorical"
    real = "real"


#
# Exceptions
#


class ClawError(ValueError):
    """Base class for all input and validation errors
    raised by this package."""


class NonFiniteValue(ClawError):
    pass


class MixedCovariateKinds(ClawError):
    pass


class EmptyDataset(ClawError):
    pass


class EmptyInput(ClawError):
    pass


class NonPositiveScale(ClawError):
    pass


class DegenerateSample(ClawError):
    """Raised when a bandwidth rule receives a sample
    without spread. Callers should supply a fixed
    bandwidth instead."""


class ZeroWeightRow(ClawError):
    pass


class LengthMismatch(ClawError):
    pass


class InsufficientNulls(ClawError):
    pass


class EmptyTrainingHalf(ClawError):
    pass


class EmptyGroup(ClawError):
    pass


class EmptyTraining(ClawError):
    pass


class DimensionMismatch(ClawError):
    pass


class NonPositiveWeight(ClawError):
    pass


class EmptyCalibration(ClawError):
    pass


class UnknownSetting(ClawError):
    pass


class IndexOutOfRange(ClawError):
    pass


class MissingColumn(ClawError):
    pass


class ParseError(ClawError):
    """Raised when an input file cannot be parsed. The
    1-based line number is stored on the `line`
    attribute when known."""

    def __init__(self, message, line=None):
        # type: (str, Any) -> None
        self.detail = message
        if line is not None:
            message = "line %d: %s" % (line, message)
        super(ParseError, self).__init__(message)
        self.line = line

    def __reduce__(self):
        return (type(self), (self.detail, self.line))


class ConfigError(ClawError):
    """Raised for an invalid configuration entry. The
    dotted path of the offending entry is stored on the
    `field` attribute."""

    def __init__(self, field, message):
        # type: (str, str) -> None
        super(ConfigError, self).__init__("%s: %s" % (field, message))
        self.field = field
        self.detail = message

    def __reduce__(self):
        return (type(self), (self.field, self.detail))


class ReplicationError(ClawError):
    """Raised when a simulation replication fails. Stores
    the replication index, its seed and the original
    exception (None after crossing a process boundary,
    where only its description is kept)."""

    def __init__(self, replication, seed, cause):
        # type: (int, Any, Any) -> None
        if isinstance(cause, BaseException):
            text = "%s: %s" % (type(cause).__name__, cause)
        else:
            text = str(cause)
            cause = None
        super(ReplicationError, self).__init__(
            "replication %d (seed=%r) failed: %s" % (replication, seed, text)
        )
        self.replication = replication
        self.seed = seed
        self.cause = cause
        self.cause_text = text

    def __reduce__(self):
        return (type(self), (self.replication, self.seed, self.cause_text))


class ClawNumericError(ArithmeticError):
    """Raised when an estimator produces a non-finite
    value that should have been impossible."""


#
# Tolerant comparisons
#


def leq(a, b, tol=None):
    """Elementwise ``a <= b`` allowing a relative slack
    of `tol` (default: the COMPARISON_TOLERANCE setting of
    the package configuration)."""
    if tol is None:
        tol = config.COMPARISON_TOLERANCE
    b = numpy.asarray(b, dtype=float)
    return numpy.asarray(a) <= b + tol * numpy.abs(b)


def geq(a, b, tol=None):
    """Elementwise ``a >= b`` allowing a relative slack
    of `tol`."""
    if tol is None:
        tol = config.COMPARISON_TOLERANCE
    b = numpy.asarray(b, dtype=float)
    return numpy.asarray(a) >= b - tol * numpy.abs(b)
